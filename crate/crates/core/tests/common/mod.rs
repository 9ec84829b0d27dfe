//! Independent reference simulator for integration tests: explicit
//! Kronecker products and full gate matrices, sharing no code with the
//! library's in-place kernels.

#![allow(dead_code)]

use intraport::qsim::{Gate, SingleQubit};
use num_complex::Complex64;
use rand::Rng;

pub type Vector = Vec<Complex64>;
pub type Matrix = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Column vector of a single qubit in the `|0>, |1>` basis.
pub fn qubit(q: &SingleQubit) -> Vector {
    vec![q.coeff0, q.coeff1]
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vector {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| c(f64::from(u8::from(i == j)), 0.0)).collect())
        .collect()
}

pub fn product(factors: &[SingleQubit]) -> Vector {
    factors
        .iter()
        .fold(vec![c(1.0, 0.0)], |acc, q| kron_vec(&acc, &qubit(q)))
}

/// Full `2^n × 2^n` matrix of a gate; channel 1 is the leftmost factor.
pub fn gate_matrix(n: usize, gate: Gate) -> Matrix {
    match gate {
        Gate::Hadamard(k) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let h = vec![vec![c(s, 0.0), c(s, 0.0)], vec![c(s, 0.0), c(-s, 0.0)]];
            let left = identity(1 << (k - 1));
            let right = identity(1 << (n - k));
            kron(&kron(&left, &h), &right)
        }
        Gate::ControlledNot { control, target } => {
            let image = |col: usize| {
                let bits: Vec<usize> = (0..n).map(|k| (col >> (n - 1 - k)) & 1).collect();
                let mut out = bits.clone();
                out[target - 1] ^= bits[control - 1];
                out.iter().fold(0, |acc, b| acc * 2 + b)
            };
            let dim = 1 << n;
            (0..dim)
                .map(|row| (0..dim).map(|col| c(f64::from(u8::from(image(col) == row)), 0.0)).collect())
                .collect()
        }
    }
}

pub fn mat_vec(m: &Matrix, v: &[Complex64]) -> Vector {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn run(n: usize, gates: &[Gate], v: &[Complex64]) -> Vector {
    gates
        .iter()
        .fold(v.to_vec(), |acc, g| mat_vec(&gate_matrix(n, *g), &acc))
}

pub fn overlap(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    overlap(a, b).norm_sqr()
}

pub fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn normalize(v: &[Complex64]) -> Vector {
    let n = norm_sqr(v).sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Haar-random single qubit by rejection sampling in the unit 4-ball,
/// independent of the library's sampler.
pub fn random_qubit<R: Rng>(rng: &mut R) -> SingleQubit {
    loop {
        let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>();
        if n > 1e-3 && n <= 1.0 {
            let s = n.sqrt();
            return SingleQubit::new(c(v[0] / s, v[1] / s), c(v[2] / s, v[3] / s)).unwrap();
        }
    }
}
