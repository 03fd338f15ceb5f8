//! Shared fixtures and independent oracles for the integration tests.

#![allow(dead_code)]

use dnaperiod::{Matrix, NHSemiMarkovModel, SemiMarkovKernel, SemiMarkovModel, StateSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn max_abs(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn max_row_sum_error(q: &Matrix) -> f64 {
    q.rows()
        .into_iter()
        .map(|r| (r.sum() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Two states, A→B held 1, B→A held 2: the sequence ABBABB…
pub fn fix_det() -> SemiMarkovModel {
    let states = StateSpace::new("AB".chars()).unwrap();
    let p = Matrix::from_shape_vec((2, 2), vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    let h1 = Matrix::from_shape_vec((2, 2), vec![0.0, 1.0, 0.0, 0.0]).unwrap();
    let h2 = Matrix::from_shape_vec((2, 2), vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    SemiMarkovModel::new(states, p, vec![h1, h2]).unwrap()
}

/// Four states, uniform jumps, geometric(3/4) holding truncated at 30:
/// the semi-Markov form of an i.i.d. uniform sequence.
pub fn fix_unif() -> SemiMarkovModel {
    let n = 4;
    let p = Matrix::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { 1.0 / 3.0 });
    let holding = (1..=30)
        .map(|m| {
            let v = 0.75 * 0.25f64.powi(m - 1);
            Matrix::from_shape_fn((n, n), |(i, j)| if i == j { 0.0 } else { v })
        })
        .collect();
    SemiMarkovModel::truncated(StateSpace::dna(), p, holding, 30).unwrap()
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Random embedded matrix: zero diagonal, about a quarter of the off-diagonal
/// entries zeroed, at least one positive entry per row.
pub fn random_embedded(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut p = Matrix::zeros((n, n));
    for i in 0..n {
        let mut row: Vec<f64> = (0..n)
            .map(|j| {
                if j == i || rng.random::<f64>() < 0.25 {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        if row.iter().all(|&v| v == 0.0) {
            row[(i + 1) % n] = 1.0;
        }
        normalize(&mut row);
        for j in 0..n {
            p[[i, j]] = row[j];
        }
    }
    p
}

/// Random holding distributions on `1..=m_max`, some with gaps in support.
pub fn random_holding(rng: &mut ChaCha8Rng, n: usize, m_max: usize) -> Vec<Matrix> {
    let mut h = vec![Matrix::zeros((n, n)); m_max];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut col: Vec<f64> = (0..m_max)
                .map(|_| {
                    if rng.random::<f64>() < 0.2 {
                        0.0
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect();
            if col.iter().all(|&v| v == 0.0) {
                col[0] = 1.0;
            }
            normalize(&mut col);
            for m in 0..m_max {
                h[m][[i, j]] = col[m];
            }
        }
    }
    h
}

pub fn random_model(seed: u64, n: usize, m_max: usize) -> SemiMarkovModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = StateSpace::new("ACGTUVWXYZ".chars().take(n)).unwrap();
    let p = random_embedded(&mut rng, n);
    let h = random_holding(&mut rng, n, m_max);
    SemiMarkovModel::new(states, p, h).unwrap()
}

pub fn random_nh_model(seed: u64, n: usize, m_max: usize, s: usize) -> NHSemiMarkovModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = StateSpace::new("ACGTUVWXYZ".chars().take(n)).unwrap();
    let embedded = (0..s).map(|_| random_embedded(&mut rng, n)).collect();
    let h = random_holding(&mut rng, n, m_max);
    NHSemiMarkovModel::new(states, embedded, h).unwrap()
}

/// Occupancy distribution at position `n` after entering `start` at position
/// 0 with coding position `k`.
///
/// Propagates the chain forward over the augmented state
/// (current, next, remaining sojourn), which shares no code with the
/// renewal-equation kernels of the library.
pub fn forward_occupancy<K: SemiMarkovKernel>(model: &K, start: usize, k: usize, n: usize) -> Vec<f64> {
    let size = model.n_states();
    let m_max = model.m_max();
    let s = model.period();
    let idx = |cur: usize, next: usize, rem: usize| (cur * size + next) * (m_max + 1) + rem;
    let enter = |mass: &mut Vec<f64>, state: usize, position: usize, weight: f64| {
        let p = model.embedded_at((k + position) % s);
        for next in 0..size {
            for (m, h) in model.holding().iter().enumerate() {
                let w = p[[state, next]] * h[[state, next]];
                if w > 0.0 {
                    mass[idx(state, next, m + 1)] += weight * w;
                }
            }
        }
    };
    let mut mass = vec![0.0; size * size * (m_max + 1)];
    enter(&mut mass, start, 0, 1.0);
    for t in 0..n {
        let mut next_mass = vec![0.0; mass.len()];
        for cur in 0..size {
            for next in 0..size {
                for rem in 1..=m_max {
                    let v = mass[idx(cur, next, rem)];
                    if v == 0.0 {
                        continue;
                    }
                    if rem > 1 {
                        next_mass[idx(cur, next, rem - 1)] += v;
                    } else {
                        enter(&mut next_mass, next, t + 1, v);
                    }
                }
            }
        }
        mass = next_mass;
    }
    let mut occ = vec![0.0; size];
    for cur in 0..size {
        for next in 0..size {
            for rem in 1..=m_max {
                occ[cur] += mass[idx(cur, next, rem)];
            }
        }
    }
    occ
}

/// `Q(k, n)` assembled row by row from [`forward_occupancy`].
pub fn forward_q<K: SemiMarkovKernel>(model: &K, k: usize, n: usize) -> Matrix {
    let size = model.n_states();
    let mut q = Matrix::zeros((size, size));
    for i in 0..size {
        for (j, v) in forward_occupancy(model, i, k, n).into_iter().enumerate() {
            q[[i, j]] = v;
        }
    }
    q
}

/// Scalar return-probability formula with the survival-weighted first jump:
/// `>w_i(d) + Σ_{j≠i} Σ_{x=1..d} P[i,j]·ΣH(x..)[i,j]·q_{j,i}(k+x, d−x)`,
/// with `q` taken from the forward oracle.
pub fn survival_return_oracle<K: SemiMarkovKernel>(model: &K, k: usize, d: usize) -> Vec<f64> {
    let size = model.n_states();
    let s = model.period();
    let p = model.embedded_at(k);
    let h = model.holding();
    let tail_h = |i: usize, j: usize, from: usize| -> f64 {
        h.iter().skip(from.saturating_sub(1)).map(|m| m[[i, j]]).sum()
    };
    (0..size)
        .map(|i| {
            let mut v: f64 = (0..size).map(|j| p[[i, j]] * tail_h(i, j, d + 1)).sum();
            for j in (0..size).filter(|&j| j != i) {
                for x in 1..=d {
                    let surv = p[[i, j]] * tail_h(i, j, x);
                    if surv > 0.0 {
                        v += surv * forward_occupancy(model, j, (k + x) % s, d - x)[i];
                    }
                }
            }
            v
        })
        .collect()
}
