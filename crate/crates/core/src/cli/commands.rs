use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::bitconfig::{complement, to_bitstring, CellCount};
use crate::classical::{
    build_a, build_b, det_a, inverse_step, is_bijective, kernel_pattern, rule150_step, trajectory,
    Bijectivity,
};
use crate::evolution::{amplitude_magnitude, build_stochastic, orthogonality_defect, StateVector};
use crate::spectral::{
    build_symmetric_basis, eigendecompose, exact_density_statistics, exact_mean_density,
    time_averaged_probabilities, verify_element_symmetry, verify_probability_symmetry,
    GROUPING_TOLERANCE,
};
use crate::stats::{active_profile, density_series, exact_k4_avg_prob, exact_k4_sigma, K4Initial};

use super::output::{fmt_num, grid_csv, pgm};
use super::{CliResult, Format, Report, RunConfig};

fn grid_report(cfg: &RunConfig, header: &str, rows: &[Vec<f64>]) -> Report {
    match cfg.format {
        Format::Csv => Report::single("grid.csv", grid_csv(header, rows)),
        Format::Pgm => Report::single("grid.pgm", pgm(rows)),
    }
}

pub fn evolve(cfg: &RunConfig) -> CliResult<Report> {
    let op = cfg.operator()?;
    let rows: Vec<Vec<f64>> = op
        .iter_states(cfg.initial.clone())?
        .take(cfg.steps)
        .map(|s| active_profile(&s))
        .collect();
    Ok(grid_report(cfg, "t,k,prob", &rows))
}

pub fn density(cfg: &RunConfig) -> CliResult<Report> {
    let op = cfg.operator()?;
    let series = density_series(&op, cfg.initial.clone(), cfg.steps, cfg.initial_label())?;
    let mut out = String::from("t,rho\n");
    for (t, rho) in series.samples.iter().enumerate() {
        let _ = writeln!(out, "{t},{}", fmt_num(*rho));
    }
    let _ = writeln!(out, "mean,{}", fmt_num(series.mean));
    let _ = writeln!(out, "sigma,{}", fmt_num(series.sigma));
    Ok(Report::single("density.csv", out))
}

/// Configurations on the classical orbit of `start`, together with their
/// complements.
fn orbit_with_complements(start: usize, cells: CellCount) -> HashSet<usize> {
    let mut set = HashSet::new();
    let mut s = start;
    while set.insert(s) {
        set.insert(complement(s, cells));
        s = rule150_step(s, cells);
    }
    set
}

pub fn spectrum(cfg: &RunConfig) -> CliResult<Report> {
    let op = cfg.operator()?;
    let cells = cfg.cells;
    let spec = eigendecompose(&op)?;

    let mut eig = String::from("index,re,im,phase,class\n");
    let class_of = spec.class_of();
    for (j, z) in spec.eigenvalues.iter().enumerate() {
        let _ = writeln!(
            eig,
            "{j},{},{},{},{}",
            fmt_num(z.re),
            fmt_num(z.im),
            fmt_num(z.arg()),
            class_of[j]
        );
    }

    let avg = time_averaged_probabilities(&spec, &cfg.initial)?;
    let flagged = orbit_with_complements(cfg.initial.dominant_config(), cells);
    let mut table = String::from("config_index,bitstring,avg_prob,on_trajectory\n");
    for i in cells.configs() {
        let _ = writeln!(
            table,
            "{i},{},{},{}",
            to_bitstring(i, cells),
            fmt_num(avg[i]),
            u8::from(flagged.contains(&i))
        );
    }

    let element = verify_element_symmetry(&op)?;
    let prob = verify_probability_symmetry(&spec, &cfg.initial)?;
    let mut report = String::from("check,holds,value\n");
    let _ = writeln!(
        report,
        "element_symmetry,{},{}",
        element.holds,
        fmt_num(element.max_deviation)
    );
    let _ = writeln!(
        report,
        "probability_symmetry,{},{}",
        prob.holds,
        fmt_num(prob.max_deviation)
    );
    let total: f64 = avg.iter().sum();
    let _ = writeln!(
        report,
        "avg_prob_total,{},{}",
        (total - 1.0).abs() < 1e-9,
        fmt_num(total)
    );
    let _ = writeln!(report, "eigenvalue_classes,true,{}", spec.classes.len());
    let _ = writeln!(
        report,
        "mean_density,true,{}",
        fmt_num(exact_mean_density(&spec, &cfg.initial)?)
    );

    let violation = match (element.holds, prob.holds) {
        (true, true) => None,
        (false, _) => Some("element symmetry under complement violated".to_string()),
        (_, false) => {
            Some("time-averaged probability symmetry under complement violated".to_string())
        }
    };
    Ok(Report {
        files: vec![
            ("eigenvalues.csv".to_string(), eig),
            ("avg_prob.csv".to_string(), table),
            ("symmetry.csv".to_string(), report),
        ],
        violation,
    })
}

/// Column order that places every configuration's complement `N/2` columns to
/// its right. The left half lists configurations by first visit along the
/// classical orbit of `start`, then the rest in ascending order.
pub fn paired_column_order(start: usize, cells: CellCount) -> Vec<usize> {
    let n = cells.dim() / 2;
    let mut placed = vec![false; cells.dim()];
    let mut left = Vec::with_capacity(n);
    let mut take = |i: usize, left: &mut Vec<usize>| {
        let ic = complement(i, cells);
        if !placed[i] && !placed[ic] {
            placed[i] = true;
            placed[ic] = true;
            left.push(i);
        }
    };
    let mut s = start;
    let mut seen = HashSet::new();
    while seen.insert(s) {
        take(s, &mut left);
        s = rule150_step(s, cells);
    }
    for i in cells.configs() {
        take(i, &mut left);
    }
    let right: Vec<usize> = left.iter().map(|&i| complement(i, cells)).collect();
    left.into_iter().chain(right).collect()
}

pub fn grid(cfg: &RunConfig) -> CliResult<Report> {
    let op = cfg.operator()?;
    let order: Vec<usize> = if cfg.paired_order {
        paired_column_order(cfg.initial.dominant_config(), cfg.cells)
    } else {
        cfg.cells.configs().collect()
    };
    let rows: Vec<Vec<f64>> = op
        .iter_states(cfg.initial.clone())?
        .take(cfg.steps)
        .map(|s| {
            let p = s.probabilities();
            order.iter().map(|&i| p[i]).collect()
        })
        .collect();
    match cfg.format {
        Format::Pgm => Ok(Report::single("grid.pgm", pgm(&rows))),
        Format::Csv => {
            let mut out = String::from("t,column,config_index,prob\n");
            for (t, row) in rows.iter().enumerate() {
                for (c, p) in row.iter().enumerate() {
                    let _ = writeln!(out, "{t},{c},{},{}", order[c], fmt_num(*p));
                }
            }
            Ok(Report::single("grid.csv", out))
        }
    }
}

const INVERSE_CHECK_MAX_CELLS: u32 = 20;

pub fn classical(cfg: &RunConfig) -> CliResult<Report> {
    let cells = cfg.cells;
    let start = cfg.initial.as_basis().expect("validated basis state");
    let traj = trajectory(start, cells, cfg.steps)?;

    let mut out = String::from("t,index,bitstring\n");
    for (t, &s) in traj.states.iter().enumerate() {
        let _ = writeln!(out, "{t},{s},{}", to_bitstring(s, cells));
    }
    if traj.period.is_some() {
        let t = traj.states.len();
        let s = traj.state_at(t).expect("cycle known");
        let _ = writeln!(out, "{t},{s},{}", to_bitstring(s, cells));
    }
    match traj.period {
        Some(p) => {
            let _ = writeln!(out, "# period,{p}");
            let _ = writeln!(out, "# preperiod,{}", traj.preperiod);
        }
        None => {
            let _ = writeln!(out, "# period,unknown within {} steps", cfg.steps);
        }
    }

    let mut violation = None;
    if cells.get() >= 3 {
        let det = det_a(cells)?;
        let _ = writeln!(out, "# det_A,{det}");
        match is_bijective(cells)? {
            Bijectivity::Bijective => {
                let _ = writeln!(out, "# bijective,true");
                if cells.get() <= INVERSE_CHECK_MAX_CELLS {
                    let b = build_b(cells)?;
                    let a = build_a(cells)?;
                    let identity = b.mul(&a).is_identity();
                    let mut failures = 0usize;
                    for i in cells.configs() {
                        if inverse_step(rule150_step(i, cells), cells)? != i {
                            failures += 1;
                        }
                    }
                    let _ = writeln!(out, "# inverse_times_forward_is_identity,{identity}");
                    let _ = writeln!(out, "# inverse_round_trip_failures,{failures}");
                    if failures > 0 || !identity {
                        violation = Some("classical inverse round trip violated".to_string());
                    }
                } else {
                    let _ = writeln!(
                        out,
                        "# inverse_round_trip,skipped above {INVERSE_CHECK_MAX_CELLS} cells"
                    );
                }
            }
            Bijectivity::Collision(x, y) => {
                let _ = writeln!(out, "# bijective,false");
                let _ = writeln!(out, "# collision,{x},{y}");
                let _ = writeln!(out, "# kernel_pattern,{}", kernel_pattern(cells));
            }
        }
    }
    Ok(Report {
        files: vec![("classical.csv".to_string(), out)],
        violation,
    })
}

pub fn exact4(cfg: &RunConfig) -> CliResult<Report> {
    let thetas: Vec<f64> = if cfg.theta_given {
        vec![cfg.theta.radians()]
    } else {
        (1..8).map(|j| j as f64 * PI / 16.0).collect()
    };
    let initials: Vec<K4Initial> = match cfg.initial.as_basis() {
        Some(0) if cfg.initial_spec.is_some() => vec![K4Initial::Zero],
        Some(3) => vec![K4Initial::Three],
        _ => vec![K4Initial::Zero, K4Initial::Three],
    };
    let cells = cfg.cells;

    let mut table =
        String::from("theta,initial,config_index,bitstring,closed_form,spectral,abs_diff\n");
    let mut sigmas = String::from("sigma,theta,initial,closed_form,spectral\n");
    for &theta in &thetas {
        let op = crate::evolution::EvolutionOperator::with_caps(
            cells,
            crate::evolution::MixingAngle::new(theta)?,
            cfg.caps,
        )?;
        let spec = eigendecompose(&op)?;
        for &init in &initials {
            let phi0 = StateVector::basis(cells, init.label())?;
            let avg = time_averaged_probabilities(&spec, &phi0)?;
            for i in cells.configs() {
                let closed = exact_k4_avg_prob(i, theta, init)?;
                let _ = writeln!(
                    table,
                    "{},{init},{i},{},{},{},{}",
                    fmt_num(theta),
                    to_bitstring(i, cells),
                    fmt_num(closed),
                    fmt_num(avg[i]),
                    fmt_num((closed - avg[i]).abs())
                );
            }
            let (_, sigma) = exact_density_statistics(&spec, &phi0, GROUPING_TOLERANCE)?;
            let _ = writeln!(
                sigmas,
                "sigma,{},{init},{},{}",
                fmt_num(theta),
                fmt_num(exact_k4_sigma(theta, init)?),
                fmt_num(sigma)
            );
        }
    }
    table.push('\n');
    table.push_str(&sigmas);
    Ok(Report::single("exact4.csv", table))
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value < self.limit
    }
}

pub fn verify(cfg: &RunConfig) -> CliResult<Report> {
    let op = cfg.operator()?;
    let cells = cfg.cells;
    let theta = cfg.theta;
    let m = op.dense()?;
    let mut checks = Vec::new();

    checks.push(Check {
        name: "unitarity",
        value: orthogonality_defect(&m),
        limit: 1e-12,
    });

    let mut magnitude = 0.0f64;
    for i in cells.configs() {
        for j in cells.configs() {
            magnitude =
                magnitude.max((m[(i, j)].abs() - amplitude_magnitude(i, j, cells, theta)?).abs());
        }
    }
    checks.push(Check {
        name: "magnitude_law",
        value: magnitude,
        limit: 1e-13,
    });

    checks.push(Check {
        name: "element_symmetry",
        value: verify_element_symmetry(&op)?.max_deviation,
        limit: 1e-10,
    });

    let mc = op.dense_complex()?;
    let stepped = op.step(&cfg.initial)?;
    let dense = &mc * nalgebra::DVector::from_column_slice(cfg.initial.amplitudes());
    let engine = stepped
        .amplitudes()
        .iter()
        .zip(dense.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    checks.push(Check {
        name: "matrix_free_vs_dense",
        value: engine,
        limit: 1e-12,
    });

    let norm_drift = op
        .iter_states(cfg.initial.clone())?
        .take(cfg.steps.min(1000))
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "norm_preservation",
        value: norm_drift,
        limit: 1e-10,
    });

    let u = build_stochastic(cells, theta)?;
    checks.push(Check {
        name: "stochastic_rows_and_columns",
        value: u.stochasticity_defect(),
        limit: 1e-12,
    });
    let uniform = vec![1.0 / cells.dim() as f64; cells.dim()];
    let fixed = u
        .apply(&uniform)
        .iter()
        .zip(&uniform)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "stochastic_uniform_fixed_point",
        value: fixed,
        limit: 1e-12,
    });

    let spec = eigendecompose(&op)?;
    checks.push(Check {
        name: "probability_symmetry",
        value: verify_probability_symmetry(&spec, &cfg.initial)?.max_deviation,
        limit: 1e-10,
    });
    if theta.is_interior() {
        checks.push(Check {
            name: "mean_density_half",
            value: (exact_mean_density(&spec, &cfg.initial)? - 0.5).abs(),
            limit: 1e-10,
        });
    }

    let basis = build_symmetric_basis(&op)?;
    checks.push(Check {
        name: "symmetric_basis_reduced_unitarity",
        value: basis.reduced_unitarity_defect(),
        limit: 1e-10,
    });
    checks.push(Check {
        name: "symmetric_basis_residual",
        value: basis.max_residual(&mc),
        limit: 1e-8,
    });
    checks.push(Check {
        name: "symmetric_basis_mirror",
        value: basis.max_mirror_deviation(),
        limit: 1e-10,
    });
    checks.push(Check {
        name: "symmetric_basis_orthonormality",
        value: basis.gram_defect(),
        limit: 1e-10,
    });

    let mut round_trip = 0usize;
    for i in cells.configs() {
        if inverse_step(rule150_step(i, cells), cells)? != i {
            round_trip += 1;
        }
    }
    checks.push(Check {
        name: "classical_inverse_round_trip",
        value: round_trip as f64,
        limit: 0.5,
    });

    let mut out = String::from("status,check,value,limit\n");
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(
            out,
            "{status},{},{},{}",
            c.name,
            fmt_num(c.value),
            fmt_num(c.limit)
        );
    }
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name)
        .collect();
    let violation = if failed.is_empty() {
        None
    } else {
        Some(format!("invariant violated: {}", failed.join(", ")))
    };
    Ok(Report {
        files: vec![("verify.csv".to_string(), out)],
        violation,
    })
}
