#![allow(dead_code)]

use potfield_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random walk with bounded turning, mixed speeds and occasional pauses.
pub fn random_walk(rng: &mut impl Rng, len: usize, max_turn: f64, pauses: bool) -> Vec<Vec2> {
    let mut pos = Vec2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let mut heading: f64 = rng.random_range(-core::f64::consts::PI..core::f64::consts::PI);
    let base: f64 = rng.random_range(0.2..1.8);
    let mut out = vec![pos];
    while out.len() < len {
        heading += rng.random_range(-max_turn..=max_turn);
        let speed = if pauses && rng.random_bool(0.05) {
            0.0
        } else {
            base * rng.random_range(0.5..1.5)
        };
        pos += Vec2::new(heading.cos(), heading.sin()) * speed;
        out.push(pos);
    }
    out
}

/// Direct evaluation of the closed-form label, one point at a time.
pub fn label_oracle(points: &[Vec2]) -> Vec<f64> {
    let d2: Vec<f64> = points.windows(2).map(|w| (w[1] - w[0]).norm_sq()).collect();
    let total: f64 = d2.iter().sum();
    (0..points.len())
        .map(|i| {
            let after: f64 = d2[i..].iter().sum();
            let before: f64 = d2[..i].iter().sum();
            (after - before) / total
        })
        .collect()
}
