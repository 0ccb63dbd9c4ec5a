//! Rectangular-mesh decomposition of unitary matrices.
//!
//! Any N×N unitary factors into N(N−1)/2 MZIs on nearest-neighbour mode
//! pairs, arranged in N columns, followed by one output phase per mode. The
//! sweep nulls anti-diagonals alternately from the bottom-left (multiplying
//! by device inverses on the right) and the top-right (devices on the left),
//! then pushes the leftover left-side inverses through the output phases so
//! the result is a pure feed-forward program.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{MeshEntry, MeshProgram};
use crate::error::{Error, Result};
use crate::linalg::{unitarity_error, Cmat};
use crate::mzi::{perturbed_transfer, ArmVariations, MziConfig, PhaseNoiseModel};

/// 2×2 MZI transfer matrix in closed form: i·e^{iθ/2}·[[e^{iφ}s, c], [e^{iφ}c, −s]].
fn mzi2(theta: f64, phi: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    let g = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, theta / 2.0);
    let ep = Complex64::from_polar(1.0, phi);
    [[g * ep * s, g * c], [g * ep * c, g * (-s)]]
}

fn adjoint2(t: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [[t[0][0].conj(), t[1][0].conj()], [t[0][1].conj(), t[1][1].conj()]]
}

/// u ← embed(t; modes m, m+1) · u (mixes two rows).
fn apply_left(u: &mut Cmat, m: usize, t: [[Complex64; 2]; 2]) {
    let n = u.ncols();
    for c in 0..n {
        let a = u[(m, c)];
        let b = u[(m + 1, c)];
        u[(m, c)] = t[0][0] * a + t[0][1] * b;
        u[(m + 1, c)] = t[1][0] * a + t[1][1] * b;
    }
}

/// u ← u · embed(t; modes m, m+1) (mixes two columns).
fn apply_right(u: &mut Cmat, m: usize, t: [[Complex64; 2]; 2]) {
    let n = u.nrows();
    for r in 0..n {
        let a = u[(r, m)];
        let b = u[(r, m + 1)];
        u[(r, m)] = a * t[0][0] + b * t[1][0];
        u[(r, m + 1)] = a * t[0][1] + b * t[1][1];
    }
}

#[derive(Debug, Clone, Copy)]
struct SweepOp {
    mode: usize,
    theta: f64,
    phi: f64,
}

/// Decompose a unitary into a rectangular MZI program.
pub fn decompose(u: &Cmat) -> Result<MeshProgram> {
    let n = u.nrows();
    if n != u.ncols() || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "decompose needs a square matrix, got {}×{}",
            n,
            u.ncols()
        )));
    }
    let ue = unitarity_error(u);
    if ue > 1e-7 {
        return Err(Error::Domain(format!(
            "matrix is not unitary (deviation {ue:.2e}); factor it first"
        )));
    }
    let mut work = u.clone();
    let mut rights: Vec<SweepOp> = Vec::new();
    let mut lefts: Vec<SweepOp> = Vec::new();

    for diag in 0..n.saturating_sub(1) {
        for j in 0..=diag {
            if diag % 2 == 0 {
                // Null (n−1−j, diag−j) with an inverse device on columns
                // (m, m+1); the nulled element sits in column m.
                let r = n - 1 - j;
                let m = diag - j;
                let a = work[(r, m)];
                let b = work[(r, m + 1)];
                let theta = 2.0 * b.norm().atan2(a.norm());
                let phi = if a.norm() < 1e-300 || b.norm() < 1e-300 {
                    0.0
                } else {
                    a.arg() - b.arg() - std::f64::consts::PI
                };
                apply_right(&mut work, m, adjoint2(mzi2(theta, phi)));
                rights.push(SweepOp { mode: m, theta, phi });
            } else {
                // Null (n−1−diag+j, j) with a device on rows (m, m+1); the
                // nulled element sits in row m+1.
                let m = n - 2 - diag + j;
                let c = j;
                let a = work[(m, c)];
                let b = work[(m + 1, c)];
                let theta = 2.0 * a.norm().atan2(b.norm());
                let phi = if a.norm() < 1e-300 || b.norm() < 1e-300 {
                    0.0
                } else {
                    b.arg() - a.arg()
                };
                apply_left(&mut work, m, mzi2(theta, phi));
                lefts.push(SweepOp { mode: m, theta, phi });
            }
        }
    }

    // The working matrix must now be diagonal with unit-modulus entries.
    let mut offdiag: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                offdiag = offdiag.max(work[(r, c)].norm());
            }
        }
    }
    if offdiag > 1e-8 {
        return Err(Error::Domain(format!(
            "mesh sweep left off-diagonal residue {offdiag:.2e}"
        )));
    }
    let mut d: Vec<Complex64> = (0..n).map(|i| work[(i, i)]).collect();

    // U = T_l1†⋯T_lk† · D · T_rq⋯T_r1. Push each left inverse through D
    // using T(θ,φ)†·diag(e^{iα}, e^{iβ}) = diag(−e^{i(β−θ−φ)}, −e^{i(β−θ)})·T(θ, α−β),
    // innermost (latest) first, so the program becomes D·(devices only).
    let mut ordered: Vec<SweepOp> = rights;
    for op in lefts.into_iter().rev() {
        let alpha = d[op.mode].arg();
        let beta = d[op.mode + 1].arg();
        let phi_new = alpha - beta;
        d[op.mode] = Complex64::from_polar(1.0, beta - op.theta - op.phi + std::f64::consts::PI);
        d[op.mode + 1] = Complex64::from_polar(1.0, beta - op.theta + std::f64::consts::PI);
        ordered.push(SweepOp {
            mode: op.mode,
            theta: op.theta,
            phi: phi_new,
        });
    }

    // Greedy earliest-column scheduling; device columns alternate parity with
    // the mode index in the canonical rectangle.
    let mut depth = vec![0usize; n];
    let mut entries: Vec<MeshEntry> = Vec::with_capacity(ordered.len());
    for op in &ordered {
        let mut col = depth[op.mode].max(depth[op.mode + 1]);
        if (col + op.mode) % 2 == 1 {
            col += 1;
        }
        depth[op.mode] = col + 1;
        depth[op.mode + 1] = col + 1;
        entries.push(MeshEntry {
            col,
            row: op.mode,
            config: MziConfig::new(op.theta, op.phi),
        });
    }
    // Entries sharing a column act on disjoint mode pairs and commute, and
    // cross-column dependencies already run in list order, so a stable sort
    // by (col, row) keeps the realized product identical.
    entries.sort_by_key(|e| (e.col, e.row));

    Ok(MeshProgram {
        n,
        entries,
        output_phases: d.iter().map(|z| z.arg()).collect(),
    })
}

/// Rebuild the ideal unitary realized by a program.
pub fn reconstruct_ideal(program: &MeshProgram) -> Cmat {
    let n = program.n;
    let mut u = Array2::from_diag_elem(n, Complex64::new(1.0, 0.0));
    for e in &program.entries {
        apply_left(&mut u, e.row, mzi2(e.config.theta, e.config.phi));
    }
    for (i, &p) in program.output_phases.iter().enumerate() {
        let g = Complex64::from_polar(1.0, p);
        for c in 0..n {
            u[(i, c)] *= g;
        }
    }
    u
}

/// Rebuild the unitary realized by a program whose devices carry fabrication
/// deviations. `vars` is indexed like `program.entries`.
pub fn reconstruct_perturbed(
    program: &MeshProgram,
    vars: &[ArmVariations],
    model: PhaseNoiseModel,
) -> Result<Cmat> {
    if vars.len() != program.entries.len() {
        return Err(Error::InvalidParameter(format!(
            "{} variation records for {} devices",
            vars.len(),
            program.entries.len()
        )));
    }
    let n = program.n;
    let mut u = Array2::from_diag_elem(n, Complex64::new(1.0, 0.0));
    for (e, v) in program.entries.iter().zip(vars) {
        let t = perturbed_transfer(e.config, v, model);
        let t2 = [[t[(0, 0)], t[(0, 1)]], [t[(1, 0)], t[(1, 1)]]];
        apply_left(&mut u, e.row, t2);
    }
    for (i, &p) in program.output_phases.iter().enumerate() {
        let g = Complex64::from_polar(1.0, p);
        for c in 0..n {
            u[(i, c)] *= g;
        }
    }
    Ok(u)
}

/// Column count of the canonical rectangle for an n-mode program.
pub fn column_count(program: &MeshProgram) -> usize {
    program.entries.iter().map(|e| e.col + 1).max().unwrap_or(0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramFile {
    pub program: MeshProgram,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{fro_dist, haar_unitary};
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_two_by_two_matches_the_device_model() {
        for k in 0..40 {
            let theta = -5.0 + 0.31 * k as f64;
            let phi = 4.0 - 0.23 * k as f64;
            let t = crate::mzi::ideal_transfer(MziConfig::new(theta, phi));
            let m = mzi2(theta, phi);
            for r in 0..2 {
                for c in 0..2 {
                    assert!((t[(r, c)] - m[r][c]).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn phase_absorption_identity_holds_for_all_angles() {
        // T(θ,φ)†·diag(e^{iα},e^{iβ}) = diag(−e^{i(β−θ−φ)}, −e^{i(β−θ)})·T(θ, α−β)
        for &(theta, phi, alpha, beta) in &[
            (0.7, -1.2, 0.3, 2.2),
            (0.0, 0.5, 1.0, -1.0),
            (std::f64::consts::PI, 0.9, -0.4, 0.8),
            (2.0 * std::f64::consts::PI, -0.3, 0.0, 0.0),
        ] {
            let t = mzi2(theta, phi);
            let ta = adjoint2(t);
            let da = Complex64::from_polar(1.0, alpha);
            let db = Complex64::from_polar(1.0, beta);
            let lhs = [
                [ta[0][0] * da, ta[0][1] * db],
                [ta[1][0] * da, ta[1][1] * db],
            ];
            let d1 = -Complex64::from_polar(1.0, beta - theta - phi);
            let d2 = -Complex64::from_polar(1.0, beta - theta);
            let tn = mzi2(theta, alpha - beta);
            let rhs = [
                [d1 * tn[0][0], d1 * tn[0][1]],
                [d2 * tn[1][0], d2 * tn[1][1]],
            ];
            for r in 0..2 {
                for c in 0..2 {
                    assert!((lhs[r][c] - rhs[r][c]).norm() < 1e-13, "θ={theta}");
                }
            }
        }
    }

    #[test]
    fn round_trip_is_exact_for_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 2..=16 {
            for _ in 0..4 {
                let u = haar_unitary(n, &mut rng);
                let prog = decompose(&u).unwrap();
                assert_eq!(prog.entries.len(), n * (n - 1) / 2);
                let back = reconstruct_ideal(&prog);
                assert!(
                    fro_dist(&back, &u) < 1e-10,
                    "n={n}: {}",
                    fro_dist(&back, &u)
                );
            }
        }
    }

    #[test]
    fn known_two_by_two_decomposition() {
        // A 2×2 unitary is one device plus output phases.
        let u = crate::mzi::ideal_transfer(MziConfig::new(1.1, -0.6));
        let prog = decompose(&u).unwrap();
        assert_eq!(prog.entries.len(), 1);
        assert!(fro_dist(&reconstruct_ideal(&prog), &u) < 1e-13);
    }

    #[test]
    fn identity_decomposes_into_cross_free_devices() {
        let u = Array2::from_diag_elem(6, Complex64::new(1.0, 0.0));
        let prog = decompose(&u).unwrap();
        let back = reconstruct_ideal(&prog);
        assert!(fro_dist(&back, &u) < 1e-12);
    }

    #[test]
    fn canonical_rectangle_occupancy() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [4usize, 8, 16] {
            let u = haar_unitary(n, &mut rng);
            let prog = decompose(&u).unwrap();
            assert_eq!(column_count(&prog), n, "n={n}");
            for e in &prog.entries {
                assert_eq!((e.col + e.row) % 2, 0, "column/mode parity");
                assert!(e.row + 1 < n);
            }
            // No two devices in a column touch the same mode.
            for col in 0..n {
                let mut seen = vec![false; n];
                for e in prog.entries.iter().filter(|e| e.col == col) {
                    assert!(!seen[e.row] && !seen[e.row + 1]);
                    seen[e.row] = true;
                    seen[e.row + 1] = true;
                }
            }
        }
    }

    #[test]
    fn entry_order_is_by_column_then_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = haar_unitary(10, &mut rng);
        let prog = decompose(&u).unwrap();
        let keys: Vec<_> = prog.entries.iter().map(|e| (e.col, e.row)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn perturbed_reconstruction_with_zero_variations_matches_ideal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = haar_unitary(8, &mut rng);
        let prog = decompose(&u).unwrap();
        let vars = vec![ArmVariations::default(); prog.entries.len()];
        for model in [PhaseNoiseModel::PerArm, PhaseNoiseModel::Differential] {
            let back = reconstruct_perturbed(&prog, &vars, model).unwrap();
            assert!(fro_dist(&back, &u) < 1e-10);
        }
    }

    #[test]
    fn light_cone_locality_in_a_small_mesh() {
        // Perturbing only the column-0 device on modes (2,3) of a 4-mode
        // program cannot change how inputs 0 and 1 map to any output, until
        // later columns mix them; compare against the ideal on the first
        // column of inputs: differences must vanish for input 0 at column 0.
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let u = haar_unitary(4, &mut rng);
        let prog = decompose(&u).unwrap();
        let mut vars = vec![ArmVariations::default(); prog.entries.len()];
        let idx = prog
            .entries
            .iter()
            .position(|e| e.col == 0 && e.row == 2)
            .expect("canonical rectangle has a (0,2) device");
        vars[idx].delta_beta = [0.01, -0.02, 0.003, 0.0];
        let pert = reconstruct_perturbed(&prog, &vars, PhaseNoiseModel::PerArm).unwrap();
        let ideal = reconstruct_ideal(&prog);
        // Inputs 0,1 never traverse the perturbed device's column-0 pair
        // before mixing, but outputs from inputs 2,3 must differ.
        let d01: f64 = (0..4)
            .map(|r| (pert[(r, 0)] - ideal[(r, 0)]).norm() + (pert[(r, 1)] - ideal[(r, 1)]).norm())
            .sum();
        let d23: f64 = (0..4)
            .map(|r| (pert[(r, 2)] - ideal[(r, 2)]).norm() + (pert[(r, 3)] - ideal[(r, 3)]).norm())
            .sum();
        assert!(d23 > 1e-3, "perturbation had no effect: {d23}");
        assert!(d01 < d23 * 1e-6, "columns 0/1 were touched: {d01} vs {d23}");
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let m = array![[o, o], [z, o]];
        assert!(matches!(decompose(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn program_serialization_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let u = haar_unitary(6, &mut rng);
        let prog = decompose(&u).unwrap();
        let text = serde_json::to_string(&ProgramFile {
            program: prog.clone(),
        })
        .unwrap();
        let back: ProgramFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.program.entries.len(), prog.entries.len());
        let d = fro_dist(&reconstruct_ideal(&back.program), &reconstruct_ideal(&prog));
        assert!(d < 1e-12);
    }
}
