#![allow(dead_code)]

use expu_core::{Channel, InputDistribution};
use proptest::prelude::*;

/// Normalizes nonnegative weights; values below `zero_below` become exact
/// zeros, and an all-zero row puts its mass on the first entry.
pub fn normalize(w: Vec<f64>, zero_below: f64) -> Vec<f64> {
    let mut w: Vec<f64> = w
        .into_iter()
        .map(|x| if x < zero_below { 0.0 } else { x })
        .collect();
    let s: f64 = w.iter().sum();
    if s == 0.0 {
        w[0] = 1.0;
        return w;
    }
    w.iter().map(|x| x / s).collect()
}

pub fn channel_with(inputs: usize, outputs: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, outputs), inputs).prop_map(|rows| {
        Channel::new(rows.into_iter().map(|r| normalize(r, 0.15)).collect()).unwrap()
    })
}

pub fn channel() -> impl Strategy<Value = Channel> {
    (2..=4usize, 2..=4usize).prop_flat_map(|(k, l)| channel_with(k, l))
}

pub fn pmf(k: usize) -> impl Strategy<Value = InputDistribution> {
    prop::collection::vec(0.0..1.0f64, k)
        .prop_map(|w| InputDistribution::new(normalize(w, 0.1)).unwrap())
}

pub fn channel_and_q() -> impl Strategy<Value = (Channel, InputDistribution)> {
    channel().prop_flat_map(|ch| {
        let k = ch.inputs();
        (Just(ch), pmf(k))
    })
}

/// All sequences over `0..k` of length `n`, in lexicographic order.
pub fn all_sequences(k: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}
