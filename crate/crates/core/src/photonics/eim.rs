//! Analytic effective-index-method surrogate for strip and ridge waveguides.
//!
//! Two-step reduction of the 2D cross-section: a vertical slab solve (TE)
//! gives the core (and, for ridge, the side-slab) effective index, then a
//! lateral symmetric slab solve (TM, accounting for the polarization swap)
//! gives the quasi-TE mode index. Good to a few percent against full-vector
//! solvers, and smooth enough for finite-difference sensitivities, which is
//! what the design loops actually consume.

use super::{EffIndexModel, Geometry, WaveguideSpec, N_AIR, N_OXIDE, N_SILICON};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
enum Polarization {
    Te,
    Tm,
}

/// Phase-matching residual for the fundamental mode of an asymmetric slab:
/// h·d − φ_sub − φ_cover, strictly decreasing in n. Lengths in nm.
fn slab_residual(
    n: f64,
    d_nm: f64,
    k0: f64,
    nf: f64,
    ns: f64,
    nc: f64,
    pol: Polarization,
) -> f64 {
    let h = k0 * (nf * nf - n * n).max(0.0).sqrt();
    let p = k0 * (n * n - ns * ns).max(0.0).sqrt();
    let q = k0 * (n * n - nc * nc).max(0.0).sqrt();
    let (rs, rc) = match pol {
        Polarization::Te => (1.0, 1.0),
        Polarization::Tm => ((nf * nf) / (ns * ns), (nf * nf) / (nc * nc)),
    };
    h * d_nm - (rs * p / h.max(1e-300)).atan() - (rc * q / h.max(1e-300)).atan()
}

/// Fundamental guided index of a slab: core `nf` of thickness `d_nm` between
/// substrate `ns` and cover `nc`.
fn slab_index(d_nm: f64, wavelength_nm: f64, nf: f64, ns: f64, nc: f64, pol: Polarization) -> Result<f64> {
    if !(nf > ns && nf > nc && d_nm > 0.0) {
        return Err(Error::Domain(format!(
            "slab stack not guiding: nf={nf}, ns={ns}, nc={nc}, d={d_nm}"
        )));
    }
    let k0 = 2.0 * std::f64::consts::PI / wavelength_nm;
    let mut lo = ns.max(nc) + 1e-12;
    let mut hi = nf - 1e-12;
    if slab_residual(lo, d_nm, k0, nf, ns, nc, pol) <= 0.0 {
        return Err(Error::Domain(format!(
            "no guided fundamental mode in slab (d = {d_nm} nm)"
        )));
    }
    // The residual is strictly decreasing and negative at hi; bisect.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slab_residual(mid, d_nm, k0, nf, ns, nc, pol) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Effective-index-method evaluator.
#[derive(Debug, Clone, Copy)]
pub struct EimModel {
    pub n_core: f64,
    pub n_substrate: f64,
    /// Top (and side) cladding index; air by default, oxide optionally.
    pub n_top: f64,
}

impl Default for EimModel {
    fn default() -> Self {
        EimModel {
            n_core: N_SILICON,
            n_substrate: N_OXIDE,
            n_top: N_AIR,
        }
    }
}

impl EimModel {
    pub fn with_oxide_top() -> EimModel {
        EimModel {
            n_top: N_OXIDE,
            ..EimModel::default()
        }
    }
}

impl EffIndexModel for EimModel {
    fn n_eff(&self, spec: &WaveguideSpec) -> Result<f64> {
        if !spec.in_probe_range() {
            return Err(Error::Domain(format!(
                "spec outside evaluator validity box: width {} nm",
                spec.width_nm
            )));
        }
        // Vertical solve in the core region.
        let n_core_region = slab_index(
            spec.thickness_nm,
            spec.wavelength_nm,
            self.n_core,
            self.n_substrate,
            self.n_top,
            Polarization::Te,
        )?;
        // Side index: cladding for strip, the exposed-slab mode for ridge.
        let n_side = match spec.geometry {
            Geometry::Strip => self.n_top.max(1.0),
            Geometry::Ridge => slab_index(
                spec.slab_height_nm,
                spec.wavelength_nm,
                self.n_core,
                self.n_substrate,
                self.n_top,
                Polarization::Te,
            )?,
        };
        if n_core_region <= n_side {
            return Err(Error::Domain(
                "no lateral confinement: core index at or below side index".into(),
            ));
        }
        // Lateral solve; TM because the quasi-TE field is normal to these
        // effective interfaces.
        let n = slab_index(
            spec.width_nm,
            spec.wavelength_nm,
            n_core_region,
            n_side,
            n_side,
            Polarization::Tm,
        )?;
        if !(n > N_OXIDE && n < N_SILICON) {
            return Err(Error::Domain(format!("effective index {n} outside physical bounds")));
        }
        Ok(n)
    }

    fn provenance(&self) -> &'static str {
        "analytic-surrogate"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photonics::{dn_eff, delta_beta, NOMINAL_WAVELENGTH_NM};

    /// Independent check of a slab solution via the tangent form of the
    /// dispersion relation, tan(h·d) = h(P+Q)/(h² − P·Q).
    fn tan_form_residual(n: f64, d_nm: f64, lambda: f64, nf: f64, ns: f64, nc: f64, tm: bool) -> f64 {
        let k0 = 2.0 * std::f64::consts::PI / lambda;
        let h = k0 * (nf * nf - n * n).sqrt();
        let mut p = k0 * (n * n - ns * ns).sqrt();
        let mut q = k0 * (n * n - nc * nc).sqrt();
        if tm {
            p *= (nf * nf) / (ns * ns);
            q *= (nf * nf) / (nc * nc);
        }
        (h * d_nm).tan() - h * (p + q) / (h * h - p * q)
    }

    #[test]
    fn slab_solutions_satisfy_the_tangent_dispersion_form() {
        for &(d, nf, ns, nc, tm) in &[
            (220.0, N_SILICON, N_OXIDE, N_AIR, false),
            (150.0, N_SILICON, N_OXIDE, N_AIR, false),
            (220.0, N_SILICON, N_OXIDE, N_OXIDE, false),
            (470.0, 2.8, 1.0, 1.0, true),
            (800.0, 2.8, 2.5, 2.5, true),
        ] {
            let pol = if tm { Polarization::Tm } else { Polarization::Te };
            let n = slab_index(d, 1550.0, nf, ns, nc, pol).unwrap();
            let r = tan_form_residual(n, d, 1550.0, nf, ns, nc, tm);
            assert!(r.abs() < 1e-6, "residual {r} for d={d}, nf={nf}");
        }
    }

    #[test]
    fn vertical_slab_matches_hand_calculation() {
        // 220 nm Si slab on oxide under air, TE at 1550 nm: ≈ 2.83.
        let n = slab_index(220.0, 1550.0, N_SILICON, N_OXIDE, N_AIR, Polarization::Te).unwrap();
        assert!((2.78..=2.88).contains(&n), "got {n}");
    }

    #[test]
    fn nominal_strip_index_in_expected_window() {
        let model = EimModel::default();
        let n = model.n_eff(&WaveguideSpec::nominal(Geometry::Strip)).unwrap();
        assert!((2.15..=2.45).contains(&n), "got {n}");
    }

    #[test]
    fn ridge_index_exceeds_strip_index() {
        let model = EimModel::default();
        let ns = model.n_eff(&WaveguideSpec::nominal(Geometry::Strip)).unwrap();
        let nr = model.n_eff(&WaveguideSpec::nominal(Geometry::Ridge)).unwrap();
        assert!(nr > ns, "ridge {nr} vs strip {ns}");
    }

    #[test]
    fn index_is_monotone_in_width_and_thickness_within_bounds() {
        let model = EimModel::default();
        for geometry in [Geometry::Strip, Geometry::Ridge] {
            let mut prev = 0.0;
            for w in (350..=1200).step_by(25) {
                let spec = WaveguideSpec::nominal(geometry).with_width(w as f64);
                let n = model.n_eff(&spec).unwrap();
                assert!(n > N_OXIDE && n < N_SILICON);
                assert!(n > prev, "not monotone in width at {w} ({geometry})");
                prev = n;
            }
            let mut prev = 0.0;
            for t in (180..=260).step_by(10) {
                let mut spec = WaveguideSpec::nominal(geometry);
                spec.thickness_nm = t as f64;
                let n = model.n_eff(&spec).unwrap();
                assert!(n > prev, "not monotone in thickness at {t} ({geometry})");
                prev = n;
            }
        }
    }

    #[test]
    fn width_sensitivity_saturates_with_width() {
        let model = EimModel::default();
        let s350 = dn_eff(&model, &WaveguideSpec::nominal(Geometry::Strip).with_width(350.0)).unwrap();
        let s1200 = dn_eff(&model, &WaveguideSpec::nominal(Geometry::Strip).with_width(1200.0)).unwrap();
        assert!(s350.dn_dw > 0.0 && s1200.dn_dw > 0.0);
        assert!(
            s1200.dn_dw <= 0.25 * s350.dn_dw,
            "dn/dw barely decayed: {} vs {}",
            s1200.dn_dw,
            s350.dn_dw
        );
    }

    #[test]
    fn thickness_sensitivity_dominates_for_wide_strips() {
        let model = EimModel::default();
        for w in [600.0, 800.0, 1000.0, 1200.0] {
            let s = dn_eff(&model, &WaveguideSpec::nominal(Geometry::Strip).with_width(w)).unwrap();
            assert!(s.dn_dt > s.dn_dw, "w = {w}: dn/dt {} vs dn/dw {}", s.dn_dt, s.dn_dw);
        }
    }

    #[test]
    fn ridge_is_less_sensitive_than_strip() {
        let model = EimModel::default();
        let ss = dn_eff(&model, &WaveguideSpec::nominal(Geometry::Strip)).unwrap();
        let sr = dn_eff(&model, &WaveguideSpec::nominal(Geometry::Ridge)).unwrap();
        assert!(sr.dn_dw < ss.dn_dw, "dn/dw ridge {} strip {}", sr.dn_dw, ss.dn_dw);
        assert!(sr.dn_dt < ss.dn_dt, "dn/dt ridge {} strip {}", sr.dn_dt, ss.dn_dt);
    }

    #[test]
    fn sensitivity_magnitudes_are_physical() {
        // Published full-vector values for similar stacks sit around
        // 1e-3..3e-3 per nm; the surrogate should land in the same decade.
        let model = EimModel::default();
        let s = dn_eff(&model, &WaveguideSpec::nominal(Geometry::Strip)).unwrap();
        assert!((2e-4..=6e-3).contains(&s.dn_dw), "dn/dw {}", s.dn_dw);
        assert!((2e-4..=6e-3).contains(&s.dn_dt), "dn/dt {}", s.dn_dt);
    }

    #[test]
    fn delta_beta_is_linear_and_scaled_correctly() {
        let model = EimModel::default();
        let spec = WaveguideSpec::nominal(Geometry::Strip);
        let bw = delta_beta(&model, &spec, 1.0, 0.0).unwrap();
        let bt = delta_beta(&model, &spec, 0.0, 1.0).unwrap();
        let both = delta_beta(&model, &spec, 3.0, -2.0).unwrap();
        assert!((both - (3.0 * bw - 2.0 * bt)).abs() < 1e-12);
        // Against the definition via sensitivities: 2π/λ[µm] · Δn.
        let s = dn_eff(&model, &spec).unwrap();
        let k = 2.0 * std::f64::consts::PI / (NOMINAL_WAVELENGTH_NM * 1e-3);
        assert!((bw - k * s.dn_dw).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_width_is_a_domain_error() {
        let model = EimModel::default();
        let mut spec = WaveguideSpec::nominal(Geometry::Strip);
        spec.width_nm = 2000.0;
        assert!(matches!(model.n_eff(&spec), Err(Error::Domain(_))));
    }

    #[test]
    fn oxide_top_raises_the_index() {
        let air = EimModel::default();
        let oxide = EimModel::with_oxide_top();
        let spec = WaveguideSpec::nominal(Geometry::Strip);
        assert!(oxide.n_eff(&spec).unwrap() > air.n_eff(&spec).unwrap());
    }
}
