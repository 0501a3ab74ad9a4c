//! Acceptance suite. Each test prints one `criterion N: PASS|FAIL` line
//! (written past the test harness capture) and then asserts.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qca::bitconfig::{complement, CellCount};
use qca::classical::{det_a, inverse_step, is_bijective, rule150_step, Bijectivity};
use qca::evolution::{
    build_stochastic, orthogonality_defect, EvolutionOperator, MixingAngle, StateVector,
};
use qca::spectral::{
    build_symmetric_basis, eigendecompose, exact_mean_density, time_averaged_probabilities,
};
use qca::stats::{density_series, exact_k4_sigma, reversal_time, K4Initial};
use qca::QcaError;

const UNITARITY_TOL: f64 = 1e-12;
const ENTRY_TOL: f64 = 1e-14;
const MAGNITUDE_TOL: f64 = 1e-13;
const EXACT_K4_TOL: f64 = 1e-10;
const SIGMA_PRINTED_TOL: f64 = 5e-6;
const DENSITY_EXACT_TOL: f64 = 1e-10;
const DENSITY_FINITE_TOL: f64 = 5e-3;
const DENSITY_FINITE_STEPS: usize = 100_000;
const FIG_STEPS: usize = 10_000;
const FIG_TOL: f64 = 0.01;
const SYMMETRY_TOL: f64 = 1e-10;
const BASIS_RESIDUAL_TOL: f64 = 1e-8;
const CLASSICAL_TOL: f64 = 1e-12;
const REVERSAL_REL_TOL: f64 = 0.2;
const STOCHASTIC_TOL: f64 = 1e-12;
const ENGINE_TOL: f64 = 1e-12;
const LARGE_STEP_BUDGET: Duration = Duration::from_millis(500);

const THETA_GRID: [f64; 4] = [0.1, 0.35764, FRAC_PI_4, 1.3];
const UNITARY_CELLS: [u32; 4] = [4, 5, 7, 8];

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "\ncriterion {n:2} [{name}]: {status}  {detail}");
}

fn cells(k: u32) -> CellCount {
    CellCount::new(k).unwrap()
}

fn op(k: u32, theta: f64) -> EvolutionOperator {
    EvolutionOperator::new(cells(k), MixingAngle::new(theta).unwrap()).unwrap()
}

/// Rule 150 cell by cell from explicit neighbourhoods.
fn rule150_oracle(i: usize, k: u32) -> usize {
    let k = k as usize;
    let bit = |p: usize| (i >> (p % k)) & 1;
    (0..k)
        .map(|p| ((bit(p + k - 1) + bit(p) + bit(p + 1)) % 2) << p)
        .sum()
}

/// Determinant by dynamic programming over subsets of used columns.
fn subset_dp_determinant(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    let mut dp = vec![0i128; 1 << n];
    dp[0] = 1;
    for mask in 0usize..(1 << n) {
        let row = mask.count_ones() as usize;
        if row == n || dp[mask] == 0 {
            continue;
        }
        for c in 0..n {
            if mask & (1 << c) != 0 || m[row][c] == 0 {
                continue;
            }
            // columns already used to the right of c are inversions
            let inversions = (mask >> (c + 1)).count_ones();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            dp[mask | (1 << c)] += sign * m[row][c] * dp[mask];
        }
    }
    dp[(1 << n) - 1]
}

/// The neighbourhood matrix of rule 150 as 0/1 integers.
fn neighbourhood_matrix(k: usize) -> Vec<Vec<i128>> {
    (0..k)
        .map(|r| {
            (0..k)
                .map(|c| i128::from(c == r || c == (r + 1) % k || c == (r + k - 1) % k))
                .collect()
        })
        .collect()
}

fn closed_form_k4_average(i: usize, theta: f64, from_zero: bool) -> f64 {
    let (c4, c8) = ((4.0 * theta).cos(), (8.0 * theta).cos());
    let s4 = (4.0 * theta).sin();
    let s2 = (2.0 * theta).sin();
    let flat = 1.0 / 32.0 + s4 * s4 / 128.0;
    let low = s2.powi(4) / 32.0;
    if from_zero {
        match i {
            0 | 15 => 83.0 / 256.0 + 3.0 / 64.0 * c4 + c8 / 256.0,
            1 | 2 | 4 | 7 | 8 | 11 | 13 | 14 => flat,
            _ => low,
        }
    } else {
        match i {
            0 | 3 | 5 | 6 | 9 | 10 | 12 | 15 => flat,
            1 | 4 | 11 | 14 => low,
            2 | 13 => 51.0 / 256.0 - c4 / 64.0 + c8 / 256.0,
            _ => 35.0 / 256.0 + 3.0 / 64.0 * c4 + c8 / 256.0,
        }
    }
}

#[test]
fn criterion_01_unitarity_gate() {
    let mut worst = 0.0f64;
    for &k in &UNITARY_CELLS {
        for &t in &THETA_GRID {
            worst = worst.max(orthogonality_defect(&op(k, t).dense().unwrap()));
        }
    }
    let rejected = [6, 9].iter().all(|&k| {
        matches!(
            EvolutionOperator::new(cells(k), MixingAngle::new(0.3).unwrap()),
            Err(QcaError::NonUnitaryConfiguration { .. })
        )
    });
    let pass = worst < UNITARITY_TOL && rejected;
    report(
        1,
        "unitarity gate",
        pass,
        &format!("max|MtM-I|={worst:.2e}, K=6,9 rejected={rejected}"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_worked_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let t: f64 = rng.random_range(0.0..FRAC_PI_2);
        let (c, s) = (t.cos(), t.sin());
        let o = op(4, t);
        for (i, j, want) in [
            (0, 0, c.powi(4)),
            (5, 3, -c * c * s * s),
            (0, 2, c * s.powi(3)),
        ] {
            worst = worst.max((o.element(i, j) - want).abs());
        }
    }
    let pass = worst < ENTRY_TOL;
    report(
        2,
        "worked entries",
        pass,
        &format!("max deviation {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_03_magnitude_law() {
    let mut worst = 0.0f64;
    for k in [4u32, 5] {
        for &t in &THETA_GRID {
            let m = op(k, t).dense().unwrap();
            let (c, s) = (t.cos(), t.sin());
            for j in 0..1usize << k {
                let fj = rule150_oracle(j, k);
                for i in 0..1usize << k {
                    let d = (i ^ fj).count_ones() as i32;
                    let want = c.powi(k as i32 - d) * s.powi(d);
                    worst = worst.max((m[(i, j)].abs() - want).abs());
                }
            }
        }
    }
    let pass = worst < MAGNITUDE_TOL;
    report(
        3,
        "magnitude law",
        pass,
        &format!("max deviation {worst:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_classical_invertibility() {
    let mut dets_ok = true;
    let mut dets = Vec::new();
    for k in 3..=12u32 {
        let expected = [0i128, -3, 3][(k % 3) as usize];
        let lib = det_a(cells(k)).unwrap();
        let oracle = subset_dp_determinant(&neighbourhood_matrix(k as usize));
        assert_eq!(
            lib, oracle,
            "determinant disagrees with the subset oracle at K={k}"
        );
        dets_ok &= lib == expected;
        dets.push(format!("{k}:{lib}"));
    }
    let mut round_trip_ok = true;
    for k in [4u32, 5, 7, 8] {
        let c = cells(k);
        for i in c.configs() {
            round_trip_ok &= inverse_step(rule150_step(i, c), c).unwrap() == i;
        }
    }
    let c6 = cells(6);
    let witness = rule150_step(0, c6) == 0
        && rule150_step(54, c6) == 0
        && rule150_oracle(54, 6) == 0
        && matches!(is_bijective(c6).unwrap(), Bijectivity::Collision(_, _));
    let pass = dets_ok && round_trip_ok && witness;
    report(
        4,
        "classical invertibility",
        pass,
        &format!(
            "det by K mod 3 as (0,-3,3)={dets_ok} [computed {}], round trips={round_trip_ok}, \
             K=6 witness (0,54)={witness}",
            dets.join(" ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_exact_k4_statistics() {
    let thetas = [0.2, FRAC_PI_8, 0.9];
    let k4 = cells(4);
    let mut worst_zero = 0.0f64;
    let mut worst_three = 0.0f64;
    let mut worst_two = 0.0f64;
    for &t in &thetas {
        let spec = eigendecompose(&op(4, t)).unwrap();
        let avg = |start: usize| {
            time_averaged_probabilities(&spec, &StateVector::basis(k4, start).unwrap()).unwrap()
        };
        let (a0, a3, a2) = (avg(0), avg(3), avg(2));
        for i in 0..16 {
            worst_zero = worst_zero.max((a0[i] - closed_form_k4_average(i, t, true)).abs());
            worst_three = worst_three.max((a3[i] - closed_form_k4_average(i, t, false)).abs());
            worst_two = worst_two.max((a2[i] - closed_form_k4_average(i, t, false)).abs());
        }
    }

    let sigma_zero = exact_k4_sigma(FRAC_PI_4, K4Initial::Zero).unwrap();
    let sigma_three = exact_k4_sigma(FRAC_PI_4, K4Initial::Three).unwrap();
    let limit = exact_k4_sigma(1e-9, K4Initial::Zero).unwrap();
    let sigma_ok = (sigma_zero - 0.27951).abs() < SIGMA_PRINTED_TOL
        && (sigma_three - 0.13975).abs() < SIGMA_PRINTED_TOL
        && (limit - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-12;

    let pass = worst_zero < EXACT_K4_TOL && worst_three < EXACT_K4_TOL && sigma_ok;
    report(
        5,
        "exact K=4 statistics",
        pass,
        &format!(
            "all-zero start dev {worst_zero:.2e}; index-3 start dev {worst_three:.2e}; \
             sigma(pi/4)={sigma_zero:.5}/{sigma_three:.5}, theta->0 {limit:.5}; \
             diagnostic: index-2 start reproduces the second table to {worst_two:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_half_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_exact = 0.0f64;
    for &k in &UNITARY_CELLS {
        let c = cells(k);
        let random = StateVector::random(c, &mut rng);
        for &t in &THETA_GRID {
            let spec = eigendecompose(&op(k, t)).unwrap();
            let starts = [
                StateVector::basis(c, 0).unwrap(),
                StateVector::basis(c, 3).unwrap(),
                StateVector::basis(c, 11).unwrap(),
                random.clone(),
            ];
            for phi in &starts {
                let rho = exact_mean_density(&spec, phi).unwrap();
                worst_exact = worst_exact.max((rho - 0.5).abs());
            }
        }
    }

    let mut worst_finite = 0.0f64;
    for &k in &UNITARY_CELLS {
        for &t in &[0.35764, 1.3] {
            let c = cells(k);
            let series = density_series(
                &op(k, t),
                StateVector::basis(c, 0).unwrap(),
                DENSITY_FINITE_STEPS,
                "delta_0",
            )
            .unwrap();
            worst_finite = worst_finite.max((series.mean - 0.5).abs());
        }
    }
    let pass = worst_exact < DENSITY_EXACT_TOL && worst_finite < DENSITY_FINITE_TOL;
    report(
        6,
        "half density",
        pass,
        &format!(
            "exact dev {worst_exact:.2e}; finite T={DENSITY_FINITE_STEPS} dev {worst_finite:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_density_statistics_k5() {
    let c = cells(5);
    let o = op(5, 0.35764);
    let zero = density_series(&o, StateVector::basis(c, 0).unwrap(), FIG_STEPS, "delta_0").unwrap();
    let eleven = density_series(
        &o,
        StateVector::basis(c, 11).unwrap(),
        FIG_STEPS,
        "delta_11",
    )
    .unwrap();
    let pass = (zero.mean - 0.4945).abs() < FIG_TOL
        && (eleven.mean - 0.4997).abs() < FIG_TOL
        && (zero.sigma - 0.191).abs() < FIG_TOL
        && (eleven.sigma - 0.088).abs() < FIG_TOL;
    report(
        7,
        "density statistics K=5",
        pass,
        &format!(
            "start 0: mean {:.4} sigma {:.4}; start 11: mean {:.4} sigma {:.4}",
            zero.mean, zero.sigma, eleven.mean, eleven.sigma
        ),
    );
    assert!(pass);
}

fn parity(i: usize) -> f64 {
    if i.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[test]
fn criterion_08_symmetries() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut element = 0.0f64;
    let mut probability = 0.0f64;
    let mut basis_worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);

    for &k in &UNITARY_CELLS {
        let c = cells(k);
        for &t in &THETA_GRID {
            let o = op(k, t);
            let exhaustive = k <= 5;
            let pairs: Vec<(usize, usize)> = if exhaustive {
                c.configs()
                    .flat_map(|i| c.configs().map(move |j| (i, j)))
                    .collect()
            } else {
                (0..2000)
                    .map(|_| (rng.random_range(0..c.dim()), rng.random_range(0..c.dim())))
                    .collect()
            };
            for (i, j) in pairs {
                let lhs = o.element(complement(i, c), complement(j, c));
                element = element.max((lhs - parity(i) * parity(j) * o.element(i, j)).abs());
            }

            let spec = eigendecompose(&o).unwrap();
            for start in [0usize, 3, 11] {
                let avg =
                    time_averaged_probabilities(&spec, &StateVector::basis(c, start).unwrap())
                        .unwrap();
                let indices: Vec<usize> = if exhaustive {
                    c.configs().collect()
                } else {
                    (0..200).map(|_| rng.random_range(0..c.dim())).collect()
                };
                for i in indices {
                    probability = probability.max((avg[i] - avg[complement(i, c)]).abs());
                }
            }

            let b = build_symmetric_basis(&o).unwrap();
            let m = o.dense_complex().unwrap();
            basis_worst.0 = basis_worst.0.max(b.reduced_unitarity_defect());
            basis_worst.1 = basis_worst.1.max(b.max_residual(&m));
            basis_worst.2 = basis_worst.2.max(b.max_mirror_deviation());
            basis_worst.3 = basis_worst.3.max(b.gram_defect());
        }
    }
    let pass = element < SYMMETRY_TOL
        && probability < SYMMETRY_TOL
        && basis_worst.0 < SYMMETRY_TOL
        && basis_worst.1 < BASIS_RESIDUAL_TOL
        && basis_worst.2 < SYMMETRY_TOL
        && basis_worst.3 < SYMMETRY_TOL;
    report(
        8,
        "symmetries",
        pass,
        &format!(
            "element {element:.2e}, probability {probability:.2e}, reduced unitarity {:.2e}, \
             residual {:.2e}, mirror {:.2e}, gram {:.2e}",
            basis_worst.0, basis_worst.1, basis_worst.2, basis_worst.3
        ),
    );
    assert!(pass);
}

/// Follows the dominant configuration and checks it carries all the weight.
fn follows(o: &EvolutionOperator, start: usize, expected: &[usize]) -> bool {
    let c = o.cells();
    o.iter_states(StateVector::basis(c, start).unwrap())
        .unwrap()
        .zip(expected)
        .all(|(s, &want)| (s.probabilities()[want] - 1.0).abs() < CLASSICAL_TOL)
}

#[test]
fn criterion_09_classical_limits() {
    let k5 = follows(&op(5, 0.0), 11, &[11, 8, 28, 11, 8, 28, 11]);
    let k7 = follows(&op(7, 0.0), 11, &[11, 88, 69, 44, 98, 22, 49, 11]);

    let mut flipped = true;
    for k in [4u32, 5, 7] {
        let c = cells(k);
        let mask = c.mask();
        for start in [0usize, 1, 11 & mask] {
            let mut expected = vec![start];
            for _ in 0..12 {
                let prev = *expected.last().unwrap();
                expected.push(rule150_oracle(prev, k) ^ mask);
            }
            flipped &= follows(&op(k, FRAC_PI_2), start, &expected);
        }
    }
    let pass = k5 && k7 && flipped;
    report(
        9,
        "classical limits",
        pass,
        &format!("rule-150 K=5 cycle={k5}, K=7 cycle={k7}, rule-105 trajectories={flipped}"),
    );
    assert!(pass);
}

#[test]
fn criterion_10_reversal_time() {
    let thetas = [0.01, 0.02, 0.05];
    let times: Vec<usize> = thetas
        .iter()
        .map(|&t| reversal_time(&op(4, t), 10_000).unwrap())
        .collect();
    let within: Vec<bool> = thetas
        .iter()
        .zip(&times)
        .map(|(&t, &r)| {
            let target = PI / (2.0 * t);
            ((r as f64 - target) / target).abs() <= REVERSAL_REL_TOL
        })
        .collect();
    let monotone = times.windows(2).all(|w| w[0] > w[1]);
    let pass = within.iter().all(|&w| w) && monotone;
    let detail: Vec<String> = thetas
        .iter()
        .zip(&times)
        .map(|(t, r)| format!("theta={t}: t={r} vs {:.1}", PI / (2.0 * t)))
        .collect();
    report(
        10,
        "reversal time",
        pass,
        &format!("{}; monotone={monotone}", detail.join(", ")),
    );
    assert!(pass);
}

#[test]
fn criterion_11_stochastic_automaton() {
    let mut worst_sums = 0.0f64;
    let mut worst_fixed = 0.0f64;
    for k in [4u32, 5] {
        let c = cells(k);
        for &t in &THETA_GRID {
            let u = build_stochastic(c, MixingAngle::new(t).unwrap()).unwrap();
            let n = c.dim();
            for r in 0..n {
                let row: f64 = (0..n).map(|j| u.matrix[(r, j)]).sum();
                let col: f64 = (0..n).map(|i| u.matrix[(i, r)]).sum();
                worst_sums = worst_sums.max((row - 1.0).abs()).max((col - 1.0).abs());
            }
            let uniform = vec![1.0 / n as f64; n];
            for (a, b) in u.apply(&uniform).iter().zip(&uniform) {
                worst_fixed = worst_fixed.max((a - b).abs());
            }
        }
    }
    let pass = worst_sums < STOCHASTIC_TOL && worst_fixed < STOCHASTIC_TOL;
    report(
        11,
        "stochastic automaton",
        pass,
        &format!("row/column sums {worst_sums:.2e}, uniform fixed point {worst_fixed:.2e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_12_engine_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for k in [4u32, 5] {
        let c = cells(k);
        let t: f64 = rng.random_range(0.0..FRAC_PI_2);
        let o = op(k, t);
        let m = o.dense_complex().unwrap();
        for _ in 0..20 {
            let phi = StateVector::random(c, &mut rng);
            let dense = &m * DVector::from_column_slice(phi.amplitudes());
            let free = o.step(&phi).unwrap();
            let diff: f64 = free
                .amplitudes()
                .iter()
                .zip(dense.iter())
                .map(|(a, b): (&Complex64, &Complex64)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(diff);
        }
    }

    let big = op(20, 0.35764);
    let phi = StateVector::basis(cells(20), 11).unwrap();
    let started = Instant::now();
    let next = big.step(&phi).unwrap();
    let elapsed = started.elapsed();
    let norm_ok = (next.norm() - 1.0).abs() < 1e-10;

    let pass = worst < ENGINE_TOL && elapsed < LARGE_STEP_BUDGET && norm_ok;
    report(
        12,
        "engine equivalence",
        pass,
        &format!(
            "max |free - dense| {worst:.2e}; K=20 step {:.1} ms",
            elapsed.as_secs_f64() * 1e3
        ),
    );
    assert!(pass);
}
