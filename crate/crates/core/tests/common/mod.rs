#![allow(dead_code)]

pub mod tableau;
