//! Problem data for static probabilistic lot-sizing and the per-period
//! scenario statistics every model and cut family is built from.
//!
//! Periods and scenarios are 0-based throughout the crate: period `i` here is
//! period `i + 1` in the usual textbook numbering.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::InstanceError;

/// An equiprobable finite-scenario lot-sizing instance.
///
/// Immutable once constructed; every scenario has probability `1/m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    n: usize,
    m: usize,
    epsilon: f64,
    f: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
    d: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawInstance {
    n: usize,
    m: usize,
    epsilon: f64,
    f: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
    d: Vec<Vec<f64>>,
}

impl Instance {
    pub fn new(
        epsilon: f64,
        f: Vec<f64>,
        c: Vec<f64>,
        h: Vec<f64>,
        d: Vec<Vec<f64>>,
    ) -> Result<Self, InstanceError> {
        let m = d.len();
        let n = f.len();
        Self::checked(n, m, epsilon, f, c, h, d)
    }

    fn checked(
        n: usize,
        m: usize,
        epsilon: f64,
        f: Vec<f64>,
        c: Vec<f64>,
        h: Vec<f64>,
        d: Vec<Vec<f64>>,
    ) -> Result<Self, InstanceError> {
        if n == 0 {
            return Err(InstanceError::Invalid("n must be at least 1".into()));
        }
        if m == 0 {
            return Err(InstanceError::Invalid("m must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(InstanceError::Invalid(format!(
                "epsilon must lie in [0, 1), got {epsilon}"
            )));
        }
        for (name, v) in [("f", &f), ("c", &c), ("h", &h)] {
            if v.len() != n {
                return Err(InstanceError::Dimension(format!(
                    "field {name} has length {} but n = {n}",
                    v.len()
                )));
            }
            check_values(name, v)?;
        }
        if d.len() != m {
            return Err(InstanceError::Dimension(format!(
                "field d has {} rows but m = {m}",
                d.len()
            )));
        }
        for (j, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(InstanceError::Dimension(format!(
                    "row {j} of d has length {} but n = {n}",
                    row.len()
                )));
            }
            check_values("d", row)?;
        }
        Ok(Self {
            n,
            m,
            epsilon,
            f,
            c,
            h,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of scenarios that may be violated, `floor(m * epsilon)`.
    pub fn k(&self) -> usize {
        // 0.07 * 100 evaluates to 6.999...
        let prod = self.m as f64 * self.epsilon;
        let k = (prod * (1.0 + 1e-12)).floor() as usize;
        k.min(self.m - 1)
    }

    pub fn setup_cost(&self) -> &[f64] {
        &self.f
    }

    pub fn unit_cost(&self) -> &[f64] {
        &self.c
    }

    pub fn holding_cost(&self) -> &[f64] {
        &self.h
    }

    /// Demand matrix, scenario-major (`demand()[j][i]`).
    pub fn demand(&self) -> &[Vec<f64>] {
        &self.d
    }

    pub fn probability(&self) -> f64 {
        1.0 / self.m as f64
    }

    pub fn stats(&self) -> DemandStats {
        DemandStats::new(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let raw: RawInstance =
            serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))?;
        Self::checked(raw.n, raw.m, raw.epsilon, raw.f, raw.c, raw.h, raw.d)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

fn check_values(name: &str, v: &[f64]) -> Result<(), InstanceError> {
    for &x in v {
        if !x.is_finite() {
            return Err(InstanceError::Invalid(format!(
                "field {name} contains a non-finite value"
            )));
        }
        if x < 0.0 {
            return Err(InstanceError::Invalid(format!(
                "field {name} contains negative value {x}"
            )));
        }
    }
    Ok(())
}

/// `D[j][i] = d[j][0] + ... + d[j][i]`.
pub fn cumulative_demands(inst: &Instance) -> Vec<Vec<f64>> {
    inst.d
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.iter()
                .map(|&v| {
                    acc += v;
                    acc
                })
                .collect()
        })
        .collect()
}

/// Scenario orderings of period `i` by cumulative demand: descending and
/// ascending, ties broken by ascending scenario index in both.
pub fn rank_scenarios(cum: &[Vec<f64>], i: usize) -> (Vec<usize>, Vec<usize>) {
    let m = cum.len();
    let mut desc: Vec<usize> = (0..m).collect();
    desc.sort_by(|&a, &b| cum[b][i].total_cmp(&cum[a][i]).then(a.cmp(&b)));
    let mut asc: Vec<usize> = (0..m).collect();
    asc.sort_by(|&a, &b| cum[a][i].total_cmp(&cum[b][i]).then(a.cmp(&b)));
    (desc, asc)
}

/// `M[i] = max_j (D[j][n-1] - D[j][i-1])`, the largest remaining demand
/// from period `i` to the horizon.
pub fn big_m(cum: &[Vec<f64>]) -> Vec<f64> {
    let n = cum.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| {
            cum.iter()
                .map(|row| row[n - 1] - if i == 0 { 0.0 } else { row[i - 1] })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Cumulative demands, per-period rankings, the top-k sets and big-M values.
#[derive(Debug, Clone)]
pub struct DemandStats {
    n: usize,
    m: usize,
    k: usize,
    cum: Vec<Vec<f64>>,
    sigma_desc: Vec<Vec<usize>>,
    sigma_asc: Vec<Vec<usize>>,
    big_m: Vec<f64>,
}

impl DemandStats {
    pub fn new(inst: &Instance) -> Self {
        let cum = cumulative_demands(inst);
        let (sigma_desc, sigma_asc) = (0..inst.n())
            .map(|i| rank_scenarios(&cum, i))
            .unzip();
        let big_m = big_m(&cum);
        Self {
            n: inst.n(),
            m: inst.m(),
            k: inst.k(),
            cum,
            sigma_desc,
            sigma_asc,
            big_m,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cumulative(&self) -> &[Vec<f64>] {
        &self.cum
    }

    /// Cumulative demand of scenario `j` through period `i`.
    #[inline]
    pub fn cum(&self, j: usize, i: usize) -> f64 {
        self.cum[j][i]
    }

    /// Cumulative demand of scenario `j` strictly before period `i` (zero for `i = 0`).
    #[inline]
    pub fn cum_before(&self, j: usize, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.cum[j][i - 1]
        }
    }

    /// Demand of scenario `j` over periods `from..=to`.
    #[inline]
    pub fn range_demand(&self, j: usize, from: usize, to: usize) -> f64 {
        if from > to {
            0.0
        } else {
            self.cum[j][to] - self.cum_before(j, from)
        }
    }

    pub fn sigma_desc(&self, i: usize) -> &[usize] {
        &self.sigma_desc[i]
    }

    pub fn sigma_asc(&self, i: usize) -> &[usize] {
        &self.sigma_asc[i]
    }

    /// The `k` scenarios with the largest cumulative demand at period `i`.
    pub fn tstar(&self, i: usize) -> &[usize] {
        &self.sigma_desc[i][..self.k]
    }

    /// Scenario with the largest cumulative demand at period `i`.
    pub fn top(&self, i: usize) -> usize {
        self.sigma_desc[i][0]
    }

    /// Scenario ranked `k + 1` at period `i`; closes every mixing chain.
    pub fn closing(&self, i: usize) -> usize {
        self.sigma_desc[i][self.k]
    }

    /// Position of scenario `j` in the descending ranking of period `i`.
    pub fn rank_of(&self, i: usize, j: usize) -> usize {
        self.sigma_desc[i]
            .iter()
            .position(|&s| s == j)
            .expect("scenario index in range")
    }

    pub fn big_m(&self) -> &[f64] {
        &self.big_m
    }
}

/// Discrete-uniform ranges (inclusive) used by [`generate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub setup: (u32, u32),
    pub unit: (u32, u32),
    pub holding: (u32, u32),
    pub demand: (u32, u32),
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            setup: (50, 100),
            unit: (5, 10),
            holding: (30, 60),
            demand: (10, 30),
        }
    }
}

pub fn generate(n: usize, m: usize, epsilon: f64, seed: u64) -> Result<Instance, InstanceError> {
    generate_with(&GeneratorConfig::default(), n, m, epsilon, seed)
}

pub fn generate_with(
    cfg: &GeneratorConfig,
    n: usize,
    m: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (u32, u32), len: usize| -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(lo..=hi) as f64).collect()
    };
    let f = draw(cfg.setup, n);
    let c = draw(cfg.unit, n);
    let h = draw(cfg.holding, n);
    let d = (0..m).map(|_| draw(cfg.demand, n)).collect();
    Instance::checked(n, m, epsilon, f, c, h, d)
}

/// The five-scenario, two-period demand table used throughout the tests,
/// with `epsilon = 0.4` (so `k = 2`) and caller-supplied costs.
pub fn example_instance(f: [f64; 2], c: [f64; 2], h: [f64; 2]) -> Instance {
    let d = vec![
        vec![6.0, 1.0],
        vec![3.0, 6.0],
        vec![1.0, 10.0],
        vec![2.0, 8.0],
        vec![4.0, 5.0],
    ];
    Instance::new(0.4, f.to_vec(), c.to_vec(), h.to_vec(), d).expect("valid example")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Instance {
        example_instance([50.0, 50.0], [5.0, 5.0], [1.0, 1.0])
    }

    #[test]
    fn cumulative_of_third_scenario() {
        let cum = cumulative_demands(&table());
        assert_eq!(cum[2], vec![1.0, 11.0]);
    }

    #[test]
    fn zero_demand_gives_zero_cumulative() {
        let inst = Instance::new(
            0.0,
            vec![1.0; 3],
            vec![1.0; 3],
            vec![1.0; 3],
            vec![vec![0.0; 3]; 2],
        )
        .unwrap();
        assert!(cumulative_demands(&inst).iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn cumulative_matches_loop_summation() {
        let inst = generate(4, 3, 0.0, 11).unwrap();
        let cum = cumulative_demands(&inst);
        for j in 0..3 {
            for i in 0..4 {
                let mut s = 0.0;
                for p in 0..=i {
                    s += inst.demand()[j][p];
                }
                assert_eq!(cum[j][i], s);
            }
        }
    }

    #[test]
    fn table_rankings_with_index_tie_rule() {
        let stats = table().stats();
        // 1-based (3,4,2,5,1) and (1,5,2,4,3)
        assert_eq!(stats.sigma_desc(1), &[2, 3, 1, 4, 0]);
        assert_eq!(stats.sigma_desc(0), &[0, 4, 1, 3, 2]);
        assert_eq!(stats.tstar(1), &[2, 3]);
        assert_eq!(stats.closing(0), 1);
    }

    #[test]
    fn ascending_is_reverse_ranking() {
        let stats = generate(5, 9, 0.2, 3).unwrap().stats();
        for i in 0..5 {
            let asc = stats.sigma_asc(i);
            for w in asc.windows(2) {
                assert!(stats.cum(w[0], i) <= stats.cum(w[1], i));
            }
        }
    }

    #[test]
    fn single_scenario_identity() {
        let inst = Instance::new(0.0, vec![1.0], vec![1.0], vec![1.0], vec![vec![5.0]]).unwrap();
        let stats = inst.stats();
        assert_eq!(stats.sigma_desc(0), &[0]);
        assert_eq!(stats.big_m(), &[5.0]);
    }

    #[test]
    fn table_big_m() {
        let stats = table().stats();
        assert_eq!(stats.big_m(), &[11.0, 10.0]);
    }

    #[test]
    fn k_is_floor() {
        assert_eq!(generate(5, 100, 0.05, 1).unwrap().k(), 5);
        assert_eq!(generate(2, 100, 0.07, 1).unwrap().k(), 7);
        assert_eq!(generate(2, 10, 0.0, 1).unwrap().k(), 0);
        assert_eq!(table().k(), 2);
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate(6, 7, 0.1, 42).unwrap(), generate(6, 7, 0.1, 42).unwrap());
        assert_ne!(generate(6, 7, 0.1, 42).unwrap(), generate(6, 7, 0.1, 43).unwrap());
    }

    #[test]
    fn setup_cost_distribution() {
        let inst = generate(10_000, 1, 0.0, 5).unwrap();
        let f = inst.setup_cost();
        assert!(f.iter().all(|&v| (50.0..=100.0).contains(&v) && v.fract() == 0.0));
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        // discrete uniform on 51 points: variance (51^2 - 1) / 12
        let sd = ((51.0f64 * 51.0 - 1.0) / 12.0).sqrt() / (f.len() as f64).sqrt();
        assert!((mean - 75.0).abs() < 3.0 * sd, "mean {mean}");
        assert!(inst.demand()[0].iter().all(|&v| (10.0..=30.0).contains(&v)));
        assert!(inst.holding_cost().iter().all(|&v| (30.0..=60.0).contains(&v)));
        assert!(inst.unit_cost().iter().all(|&v| (5.0..=10.0).contains(&v)));
    }

    #[test]
    fn rejects_bad_data() {
        let neg = Instance::new(0.0, vec![1.0], vec![1.0], vec![1.0], vec![vec![-1.0]]);
        assert!(matches!(neg, Err(InstanceError::Invalid(_))));
        let eps = Instance::new(1.0, vec![1.0], vec![1.0], vec![1.0], vec![vec![1.0]]);
        assert!(eps.is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let inst = generate(3, 4, 0.25, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        inst.save(&path).unwrap();
        assert_eq!(Instance::load(&path).unwrap(), inst);

        let missing = r#"{"n":1,"m":1,"epsilon":0.0,"f":[1],"c":[1],"h":[1]}"#;
        let err = Instance::from_json(missing).unwrap_err().to_string();
        assert!(err.contains("missing field") && err.contains('d'), "{err}");

        let mismatch = r#"{"n":2,"m":1,"epsilon":0.0,"f":[1,1],"c":[1,1],"h":[1,1],"d":[[1]]}"#;
        assert!(matches!(
            Instance::from_json(mismatch),
            Err(InstanceError::Dimension(_))
        ));
        let negative = r#"{"n":1,"m":1,"epsilon":0.0,"f":[1],"c":[1],"h":[1],"d":[[-2]]}"#;
        assert!(matches!(
            Instance::from_json(negative),
            Err(InstanceError::Invalid(_))
        ));
    }
}
