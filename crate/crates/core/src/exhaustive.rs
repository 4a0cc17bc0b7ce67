//! Global discrete optimum by enumeration of all L_P^N phase vectors.
//!
//! Candidates are visited in modular Gray-code order, so consecutive
//! candidates differ in one element and both effective gains update in O(1).
//! The first element's value partitions the space across worker threads.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::secrecy::{snr_ratio, CascadeVectors, DiscretePhaseSet, PhaseVector};

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

/// Accumulators are rebuilt from scratch this often to bound rounding drift.
const RESYNC_INTERVAL: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub phase: PhaseVector,
    pub objective: f64,
    pub candidates: u128,
}

/// Number of candidates, L_P^N, or `None` on overflow.
pub fn candidate_count(levels: usize, elements: usize) -> Option<u128> {
    (levels as u128).checked_pow(u32::try_from(elements).ok()?)
}

pub fn within_cap(levels: usize, elements: usize, cap: u64) -> bool {
    candidate_count(levels, elements).is_some_and(|c| c <= cap as u128)
}

/// Candidates within this relative distance of the running best are kept and
/// re-scored exactly at the end, so incremental rounding cannot pick a
/// candidate that loses to another under exact evaluation.
const NEAR_TIE: f64 = 1e-9;
const MAX_NEAR: usize = 256;

#[derive(Debug, Clone)]
struct Best {
    objective: f64,
    near: Vec<(f64, Vec<usize>)>,
}

impl Best {
    fn new() -> Self {
        Self {
            objective: f64::NEG_INFINITY,
            near: Vec::new(),
        }
    }

    fn offer(&mut self, objective: f64, digits: &[usize]) {
        let floor = |best: f64| best - NEAR_TIE * best.abs();
        if objective < floor(self.objective) {
            return;
        }
        if objective > self.objective {
            self.objective = objective;
            let f = floor(objective);
            self.near.retain(|(v, _)| *v >= f);
        }
        if self.near.len() < MAX_NEAR {
            self.near.push((objective, digits.to_vec()));
        } else if let Some(weakest) = self
            .near
            .iter_mut()
            .filter(|(v, _)| *v < objective)
            .min_by(|a, b| a.0.total_cmp(&b.0))
        {
            *weakest = (objective, digits.to_vec());
        }
    }
}

/// Returns the maximizer of (1 + SNR_D)/(1 + SNR_E) over F^N. Ties resolve to
/// the lexicographically smallest level-index vector.
pub fn exhaustive_search(cascades: &CascadeVectors, set: &DiscretePhaseSet, cap: u64) -> Result<ExhaustiveResult> {
    let n = cascades.len();
    let levels = set.num_levels();
    if n == 0 {
        return Err(Error::Domain("no reflecting elements".into()));
    }
    let total = candidate_count(levels, n).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::EnumerationCap { candidates: total, cap });
    }

    // table[i][l] = e^{j l Δθ} · cascade_i
    let rotations: Vec<Complex64> = set.values().iter().map(|&t| Complex64::cis(t)).collect();
    let bob: Vec<Vec<Complex64>> = cascades.bob.iter().map(|&c| rotations.iter().map(|&r| r * c).collect()).collect();
    let eve: Vec<Vec<Complex64>> = cascades.eve.iter().map(|&c| rotations.iter().map(|&r| r * c).collect()).collect();
    let noise = cascades.noise;

    let sum_from = |digits: &[usize]| -> (Complex64, Complex64) {
        let d: Complex64 = digits.iter().enumerate().map(|(i, &l)| bob[i][l]).sum();
        let e: Complex64 = digits.iter().enumerate().map(|(i, &l)| eve[i][l]).sum::<Complex64>() + cascades.eve_direct;
        (d, e)
    };

    let partial: Vec<Best> = (0..levels)
        .into_par_iter()
        .map(|first| {
            let free = n - 1;
            let mut digits = vec![0usize; n];
            digits[0] = first;
            let (mut acc_d, mut acc_e) = sum_from(&digits);
            let mut best = Best::new();
            best.offer(snr_ratio(acc_d, acc_e, noise.bob, noise.eve), &digits);

            // counter digits drive the Gray digits g_i = (c_i − c_{i+1}) mod L
            let mut counter = vec![0usize; free];
            let steps = (levels as u64).pow(free as u32);
            for step in 1..steps {
                let mut k = 0;
                while counter[k] == levels - 1 {
                    counter[k] = 0;
                    k += 1;
                }
                counter[k] += 1;
                // exactly Gray digit k changes, by +1 mod L; element k + 1
                let elem = k + 1;
                let old = digits[elem];
                let new = (old + 1) % levels;
                digits[elem] = new;
                if step % RESYNC_INTERVAL == 0 {
                    (acc_d, acc_e) = sum_from(&digits);
                } else {
                    acc_d += bob[elem][new] - bob[elem][old];
                    acc_e += eve[elem][new] - eve[elem][old];
                }
                best.offer(snr_ratio(acc_d, acc_e, noise.bob, noise.eve), &digits);
            }
            best
        })
        .collect();

    let mut best = Best::new();
    for p in &partial {
        for (v, digits) in &p.near {
            best.offer(*v, digits);
        }
    }
    let mut winner: Option<(f64, Vec<usize>)> = None;
    for (_, digits) in best.near {
        let exact = cascades.ratio(&PhaseVector::from_indices(&digits, set))?;
        let better = match &winner {
            None => true,
            Some((v, d)) => exact > *v || (exact == *v && digits < *d),
        };
        if better {
            winner = Some((exact, digits));
        }
    }
    let (objective, digits) = winner.expect("at least one candidate was scored");
    let phase = PhaseVector::from_indices(&digits, set);
    Ok(ExhaustiveResult {
        phase,
        objective,
        candidates: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::CVector;
    use crate::rng::{complex_gaussian, stream};
    use crate::secrecy::NoisePowers;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn random_cascades(n: usize, seed: u64) -> CascadeVectors {
        let mut rng = stream(seed);
        let bob = CVector::from_fn(n, |_, _| complex_gaussian(&mut rng));
        let eve = CVector::from_fn(n, |_, _| complex_gaussian(&mut rng));
        CascadeVectors::new(bob, eve, NoisePowers { bob: 0.3, eve: 0.3 }).unwrap()
    }

    #[test]
    fn single_element_two_levels() {
        let cas = random_cascades(1, 1);
        let f = DiscretePhaseSet::new(2).unwrap();
        let r = exhaustive_search(&cas, &f, DEFAULT_ENUMERATION_CAP).unwrap();
        let at = |t: f64| cas.ratio(&PhaseVector::continuous(vec![t])).unwrap();
        assert_relative_eq!(r.objective, at(0.0).max(at(PI)), max_relative = 1e-14);
        assert_eq!(r.candidates, 2);
    }

    #[test]
    fn two_elements_two_levels_by_hand() {
        let cas = random_cascades(2, 7);
        let f = DiscretePhaseSet::new(2).unwrap();
        let r = exhaustive_search(&cas, &f, DEFAULT_ENUMERATION_CAP).unwrap();
        let listed = [[0.0, 0.0], [0.0, PI], [PI, 0.0], [PI, PI]];
        let best = listed
            .iter()
            .map(|t| cas.ratio(&PhaseVector::continuous(t.to_vec())).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(r.objective, best, max_relative = 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        let cas = random_cascades(8, 1);
        let f = DiscretePhaseSet::new(8).unwrap();
        let err = exhaustive_search(&cas, &f, 1000).unwrap_err();
        assert!(matches!(err, Error::EnumerationCap { candidates: 16_777_216, cap: 1000 }));
        assert!(err.to_string().contains("reduce"));
    }

    #[test]
    fn ties_break_lexicographically() {
        // no Eve and a zero cascade: every candidate has the same objective
        let cas = CascadeVectors::new(CVector::zeros(3), CVector::zeros(3), NoisePowers { bob: 1.0, eve: 1.0 }).unwrap();
        let f = DiscretePhaseSet::new(4).unwrap();
        let r = exhaustive_search(&cas, &f, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(r.phase.thetas(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn count_overflow() {
        assert_eq!(candidate_count(8, 4), Some(4096));
        assert_eq!(candidate_count(16, 100), None);
        assert!(!within_cap(8, 10, DEFAULT_ENUMERATION_CAP));
        assert!(within_cap(8, 7, DEFAULT_ENUMERATION_CAP));
    }
}
