//! Unconstrained coordinates: exp for ν0, θ, κ, ω and tanh for ρ.

use crate::charfn::{ModelKind, ModelParams};

fn is_rho(i: usize) -> bool {
    i % 5 == 4
}

/// Natural (v0, θ, κ, ω, ρ)-blocks to free coordinates.
pub fn to_free(x: &[f64]) -> Vec<f64> {
    x.iter().enumerate().map(|(i, &v)| if is_rho(i) { v.atanh() } else { v.ln() }).collect()
}

pub fn from_free(z: &[f64]) -> Vec<f64> {
    z.iter().enumerate().map(|(i, &v)| if is_rho(i) { v.tanh() } else { v.exp() }).collect()
}

/// Maps a free coordinate vector into a full parameter vector. Each free
/// coordinate writes into one or more slots of `base`; untouched slots
/// stay fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamMap {
    pub kind: ModelKind,
    pub base: Vec<f64>,
    pub slots: Vec<Vec<usize>>,
}

impl ParamMap {
    /// Every parameter free.
    pub fn full(start: &ModelParams) -> Self {
        let base = start.to_vec();
        let slots = (0..base.len()).map(|i| vec![i]).collect();
        ParamMap { kind: start.kind(), base, slots }
    }

    /// Only the listed slots free.
    pub fn subset(start: &ModelParams, free: &[usize]) -> Self {
        ParamMap { kind: start.kind(), base: start.to_vec(), slots: free.iter().map(|&i| vec![i]).collect() }
    }

    /// All but the correlations free (two-factor pinned-ρ mode).
    pub fn pinned_rho(start: &ModelParams) -> Self {
        let base = start.to_vec();
        let free: Vec<usize> = (0..base.len()).filter(|&i| !is_rho(i)).collect();
        Self::subset(start, &free)
    }

    /// Two-factor model with both factors tied to the same five values.
    pub fn symmetric(start: &ModelParams) -> Self {
        let base = start.to_vec();
        assert_eq!(base.len(), 10, "symmetric map needs a two-factor model");
        ParamMap { kind: start.kind(), base, slots: (0..5).map(|i| vec![i, i + 5]).collect() }
    }

    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    /// Free coordinates of the base vector.
    pub fn start(&self) -> Vec<f64> {
        let nat: Vec<f64> = self.slots.iter().map(|s| self.base[s[0]]).collect();
        self.slots.iter().zip(nat).map(|(s, v)| if is_rho(s[0]) { v.atanh() } else { v.ln() }).collect()
    }

    pub fn natural(&self, z: &[f64]) -> Vec<f64> {
        let mut x = self.base.clone();
        for (s, &v) in self.slots.iter().zip(z) {
            let val = if is_rho(s[0]) { v.tanh() } else { v.exp() };
            for &i in s {
                x[i] = val;
            }
        }
        x
    }

    pub fn model(&self, z: &[f64]) -> ModelParams {
        ModelParams::from_vec(self.kind, &self.natural(z))
    }
}
