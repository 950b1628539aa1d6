//! Translation from configuration keys to core objects. Everything here is
//! validation: any error maps to exit code 2 and no run directory is
//! created. The `Resolved` map records every effective parameter in
//! canonical text form; its hash names the run directory.

use std::collections::BTreeMap;

use vord_core::io::format_f64;
use vord_core::{indicator_mask, Domain, GridFunction, KappaProfile, OrderField, Region};

use crate::config::{err_cfg, file_digest, Config, ConfigResult};

/// Canonical resolved parameters: key → normalized textual value.
#[derive(Debug, Default, Clone)]
pub struct Resolved(pub BTreeMap<String, String>);

impl Resolved {
    pub fn put(&mut self, key: &str, value: impl Into<String>) {
        self.0.insert(key.to_string(), value.into());
    }

    pub fn put_f64(&mut self, key: &str, value: f64) {
        self.put(key, format_f64(value));
    }

    pub fn put_f64_list(&mut self, key: &str, values: &[f64]) {
        let text: Vec<String> = values.iter().map(|&v| format_f64(v)).collect();
        self.put(key, text.join(","));
    }
}

pub fn build_domain(cfg: &Config, resolved: &mut Resolved) -> ConfigResult<Domain> {
    let d = cfg.require_usize("domain.d")?;
    let n = cfg.require_usize("domain.n")?;
    let l = cfg.require_f64("domain.l")?;
    let domain = Domain::new(d, n, l).map_err(|e| crate::config::ConfigError(e.to_string()))?;
    resolved.put("domain.d", d.to_string());
    resolved.put("domain.n", n.to_string());
    resolved.put_f64("domain.l", l);
    Ok(domain)
}

fn build_region(cfg: &Config, domain: &Domain, resolved: &mut Resolved) -> ConfigResult<Option<Region>> {
    let kind = cfg.opt_str("field.region").unwrap_or("none");
    resolved.put("field.region", kind);
    match kind {
        "none" => Ok(None),
        "ball" => {
            let center = cfg.require_f64_list("field.ball.center")?;
            let radius = cfg.require_f64("field.ball.radius")?;
            if center.len() != domain.dimension() {
                return err_cfg(format!(
                    "field.ball.center has {} coordinates on a {}-dimensional domain",
                    center.len(),
                    domain.dimension()
                ));
            }
            resolved.put_f64_list("field.ball.center", &center);
            resolved.put_f64("field.ball.radius", radius);
            Ok(Some(Region::Ball { center, radius }))
        }
        "box" => {
            let lo = cfg.require_f64_list("field.box.lo")?;
            let hi = cfg.require_f64_list("field.box.hi")?;
            if lo.len() != domain.dimension() || hi.len() != domain.dimension() {
                return err_cfg("field.box.lo/hi must have one coordinate per dimension");
            }
            resolved.put_f64_list("field.box.lo", &lo);
            resolved.put_f64_list("field.box.hi", &hi);
            Ok(Some(Region::Cuboid { lo, hi }))
        }
        other => err_cfg(format!(
            "field.region must be none, ball, or box; got `{other}`"
        )),
    }
}

fn build_kappa(cfg: &Config, domain: &Domain, resolved: &mut Resolved) -> ConfigResult<KappaProfile> {
    let kind = cfg.require_str("field.kappa.kind")?.to_string();
    resolved.put("field.kappa.kind", kind.as_str());
    match kind.as_str() {
        "constant" => {
            let value = cfg.require_f64("field.kappa.value")?;
            resolved.put_f64("field.kappa.value", value);
            Ok(KappaProfile::Constant(value))
        }
        "bump" => {
            let base = cfg.require_f64("field.kappa.base")?;
            let amplitude = cfg.require_f64("field.kappa.amplitude")?;
            let center = cfg.require_f64_list("field.kappa.center")?;
            let radius = cfg.require_f64("field.kappa.radius")?;
            if center.len() != domain.dimension() {
                return err_cfg("field.kappa.center must have one coordinate per dimension");
            }
            resolved.put_f64("field.kappa.base", base);
            resolved.put_f64("field.kappa.amplitude", amplitude);
            resolved.put_f64_list("field.kappa.center", &center);
            resolved.put_f64("field.kappa.radius", radius);
            Ok(KappaProfile::Bump { base, amplitude, center, radius })
        }
        "table" => {
            let path = cfg
                .opt_path("field.kappa.file")
                .ok_or_else(|| crate::config::ConfigError("missing field.kappa.file".into()))?;
            let values = vord_core::io::read_scalar_table_csv(&path, domain)
                .map_err(|e| crate::config::ConfigError(format!("field.kappa.file: {e}")))?;
            resolved.put("field.kappa.file.sha256", file_digest(&path)?);
            Ok(KappaProfile::Table(values))
        }
        other => err_cfg(format!(
            "field.kappa.kind must be constant, bump, or table; got `{other}`"
        )),
    }
}

pub fn build_field(cfg: &Config, domain: Domain, resolved: &mut Resolved) -> ConfigResult<OrderField> {
    let alpha_star = cfg.require_f64("field.alpha_star")?;
    let s = cfg.f64_or("field.s", 8.0)?;
    resolved.put_f64("field.alpha_star", alpha_star);
    resolved.put_f64("field.s", s);

    let region = build_region(cfg, &domain, resolved)?;
    match region {
        None => {
            OrderField::constant(domain, alpha_star, s)
                .map_err(|e| crate::config::ConfigError(e.to_string()))
        }
        Some(region) => {
            let alpha_min = cfg.f64_or("field.alpha_min", alpha_star)?;
            let alpha_max = cfg.require_f64("field.alpha_max")?;
            resolved.put_f64("field.alpha_min", alpha_min);
            resolved.put_f64("field.alpha_max", alpha_max);
            let mask = indicator_mask(&domain, &region)
                .map_err(|e| crate::config::ConfigError(e.to_string()))?;
            let kappa = build_kappa(cfg, &domain, resolved)?;
            OrderField::build(domain, alpha_star, (alpha_min, alpha_max), s, mask, &kappa)
                .map_err(|e| crate::config::ConfigError(e.to_string()))
        }
    }
}

pub fn build_u0(cfg: &Config, domain: Domain, resolved: &mut Resolved) -> ConfigResult<GridFunction> {
    let kind = cfg.require_str("u0.kind")?.to_string();
    resolved.put("u0.kind", kind.as_str());
    match kind.as_str() {
        "gaussian" => {
            let sigma = cfg.require_f64("u0.sigma")?;
            if !(sigma > 0.0) {
                return err_cfg("u0.sigma must be positive");
            }
            let center = match cfg.opt_f64_list("u0.center")? {
                Some(c) => c,
                None => vec![0.0; domain.dimension()],
            };
            if center.len() != domain.dimension() {
                return err_cfg("u0.center must have one coordinate per dimension");
            }
            // Support-margin rule: three standard deviations inside the box.
            let l = domain.half_width();
            for &c in &center {
                if c.abs() + 3.0 * sigma > l {
                    return err_cfg(format!(
                        "gaussian support leaves the box: |{c}| + 3·{sigma} > {l}"
                    ));
                }
            }
            resolved.put_f64("u0.sigma", sigma);
            resolved.put_f64_list("u0.center", &center);
            Ok(GridFunction::from_real_fn(domain, move |x| {
                let r2: f64 = x
                    .iter()
                    .zip(&center)
                    .map(|(xi, ci)| (xi - ci) * (xi - ci))
                    .sum();
                (-r2 / (2.0 * sigma * sigma)).exp()
            }))
        }
        "mode" => {
            let mode = cfg.require_i64_list("u0.mode")?;
            if mode.len() != domain.dimension() {
                return err_cfg("u0.mode must have one integer per dimension");
            }
            let limit = (domain.points_per_axis() / 2) as i64;
            if mode.iter().any(|&k| k.abs() >= limit) {
                return err_cfg(format!(
                    "u0.mode entries must satisfy |k| < n/2 = {limit} to be resolved"
                ));
            }
            resolved.put(
                "u0.mode",
                mode.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(","),
            );
            let l = domain.half_width();
            let wave: Vec<f64> = mode
                .iter()
                .map(|&k| std::f64::consts::PI * k as f64 / l)
                .collect();
            Ok(GridFunction::from_fn(domain, move |x| {
                let phase: f64 = x.iter().zip(&wave).map(|(xi, wi)| xi * wi).sum();
                num_complex::Complex64::new(phase.cos(), phase.sin())
            }))
        }
        "table" => {
            let path = cfg
                .opt_path("u0.file")
                .ok_or_else(|| crate::config::ConfigError("missing u0.file".into()))?;
            let f = vord_core::io::read_grid_csv(&path)
                .map_err(|e| crate::config::ConfigError(format!("u0.file: {e}")))?;
            if f.domain() != domain {
                return err_cfg("u0.file domain does not match domain.* keys");
            }
            resolved.put("u0.file.sha256", file_digest(&path)?);
            Ok(f)
        }
        other => err_cfg(format!(
            "u0.kind must be gaussian, mode, or table; got `{other}`"
        )),
    }
}

/// Laplacian eigenvalue of a pure mode; used by the solve suite's oracle
/// check when the field is constant and u0 is a single mode.
pub fn mode_eigenvalue(domain: &Domain, mode: &[i64]) -> f64 {
    let l = domain.half_width();
    mode.iter()
        .map(|&k| {
            let xi = std::f64::consts::PI * k as f64 / l;
            xi * xi
        })
        .sum()
}
