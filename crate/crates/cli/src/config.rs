//! Job configuration: a JSON file overlaid by command-line flags.

use std::path::PathBuf;
use std::str::FromStr;

use kdiff::datasets::GmmSpec;
use kdiff::density::KdOptions;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Bandwidth used whenever none is given.
pub const DEFAULT_H: f64 = 0.5;

/// Uniform-jump weight tried when an undamped kd run cannot settle.
pub const FALLBACK_DAMPING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityChoice {
    Naive,
    Lc,
    KdSym,
    KdAsym,
    FkdSym,
    FkdAsym,
}

impl DensityChoice {
    pub const ALL: [DensityChoice; 6] = [
        DensityChoice::Naive,
        DensityChoice::Lc,
        DensityChoice::KdSym,
        DensityChoice::KdAsym,
        DensityChoice::FkdSym,
        DensityChoice::FkdAsym,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DensityChoice::Naive => "naive",
            DensityChoice::Lc => "lc",
            DensityChoice::KdSym => "kd-sym",
            DensityChoice::KdAsym => "kd-asym",
            DensityChoice::FkdSym => "fkd-sym",
            DensityChoice::FkdAsym => "fkd-asym",
        }
    }

    pub fn needs_eps(&self) -> bool {
        matches!(
            self,
            DensityChoice::Naive | DensityChoice::Lc | DensityChoice::KdSym | DensityChoice::FkdSym
        )
    }

    pub fn needs_k(&self) -> bool {
        matches!(self, DensityChoice::Lc | DensityChoice::KdAsym | DensityChoice::FkdAsym)
    }

    pub fn uses_h(&self) -> bool {
        !matches!(self, DensityChoice::Naive | DensityChoice::Lc)
    }

    pub fn is_kd(&self) -> bool {
        matches!(self, DensityChoice::KdSym | DensityChoice::KdAsym)
    }
}

impl FromStr for DensityChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|d| d.as_str() == s).ok_or_else(|| {
            format!("unknown density `{s}` (expected one of naive, lc, kd-sym, kd-asym, fkd-sym, fkd-asym)")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dpc,
    Dbscan,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dpc" => Ok(Algorithm::Dpc),
            "dbscan" => Ok(Algorithm::Dbscan),
            _ => Err(format!("unknown algorithm `{s}` (expected dpc or dbscan)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Eps,
    K,
    H,
    C,
    CoreThreshold,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Eps => "eps",
            Axis::K => "k",
            Axis::H => "h",
            Axis::C => "c",
            Axis::CoreThreshold => "core_threshold",
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "eps" => Ok(Axis::Eps),
            "k" => Ok(Axis::K),
            "h" => Ok(Axis::H),
            "c" => Ok(Axis::C),
            "core_threshold" | "core-threshold" => Ok(Axis::CoreThreshold),
            _ => Err(format!("unknown grid axis `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// Every field a job can carry. All optional so that a config file and the
/// command line can each supply a part.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub label_column: Option<String>,
    pub gmm: Option<GmmSpec>,
    pub standardize: Option<bool>,
    pub density: Option<DensityChoice>,
    pub algorithm: Option<Algorithm>,
    pub eps: Option<f64>,
    pub k: Option<usize>,
    pub h: Option<f64>,
    pub c: Option<usize>,
    pub core_threshold: Option<f64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub grid: Option<Grid>,
    pub sizes: Option<Vec<usize>>,
}

macro_rules! overlay_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::validation("config", e.to_string()))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(mut self, flags: RunConfig) -> RunConfig {
        overlay_fields!(self, flags; data, label_column, gmm, standardize, density, algorithm,
            eps, k, h, c, core_threshold, seed, tol, max_iter, damping, grid, sizes);
        self
    }

    pub fn density_params(&self) -> Result<DensityParams, CliError> {
        let choice = self.density.ok_or_else(|| CliError::missing("density"))?;
        let params = DensityParams {
            choice,
            eps: self.eps,
            k: self.k,
            h: self.h.unwrap_or(DEFAULT_H),
            tol: self.tol.unwrap_or(KdOptions::default().tol),
            max_iter: self.max_iter.unwrap_or(KdOptions::default().max_iter),
            damping: self.damping,
        };
        Ok(params)
    }

    pub fn cluster_params(&self) -> Result<ClusterParams, CliError> {
        Ok(ClusterParams {
            algorithm: self.algorithm.unwrap_or(Algorithm::Dpc),
            c: self.c,
            eps: self.eps,
            core_threshold: self.core_threshold,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityParams {
    pub choice: DensityChoice,
    pub eps: Option<f64>,
    pub k: Option<usize>,
    pub h: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// `None` tries an undamped walk first and falls back to
    /// [`FALLBACK_DAMPING`] if the chain cannot settle.
    pub damping: Option<f64>,
}

impl DensityParams {
    pub fn new(choice: DensityChoice) -> Self {
        DensityParams {
            choice,
            eps: None,
            k: None,
            h: DEFAULT_H,
            tol: KdOptions::default().tol,
            max_iter: KdOptions::default().max_iter,
            damping: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.choice.needs_eps() && self.eps.is_none() {
            return Err(CliError::missing_for("eps", self.choice.as_str()));
        }
        if self.choice.needs_k() && self.k.is_none() {
            return Err(CliError::missing_for("k", self.choice.as_str()));
        }
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::validation(
                    field,
                    format!("must be a positive number, got {v}"),
                ))
            }
        };
        if let Some(eps) = self.eps.filter(|_| self.choice.needs_eps()) {
            positive("eps", eps)?;
        }
        if self.k == Some(0) && self.choice.needs_k() {
            return Err(CliError::validation("k", "must be at least 1"));
        }
        if self.choice.uses_h() {
            positive("h", self.h)?;
        }
        if self.choice.is_kd() {
            positive("tol", self.tol)?;
            if self.max_iter == 0 {
                return Err(CliError::validation("max_iter", "must be at least 1"));
            }
            if let Some(beta) = self.damping.filter(|b| !(0.0..1.0).contains(b)) {
                return Err(CliError::validation(
                    "damping",
                    format!("must lie in [0, 1), got {beta}"),
                ));
            }
        }
        Ok(())
    }

    pub fn kd_options(&self, damping: f64) -> KdOptions {
        KdOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            damping,
        }
    }

    pub fn set(&mut self, axis: Axis, value: f64) {
        match axis {
            Axis::Eps => self.eps = Some(value),
            Axis::K => self.k = Some(value as usize),
            Axis::H => self.h = value,
            Axis::C | Axis::CoreThreshold => {}
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub algorithm: Algorithm,
    /// DPC center count; defaults to the number of ground-truth classes.
    pub c: Option<usize>,
    /// DBSCAN neighborhood radius.
    pub eps: Option<f64>,
    pub core_threshold: Option<f64>,
}

impl ClusterParams {
    pub fn dpc(c: Option<usize>) -> Self {
        ClusterParams {
            algorithm: Algorithm::Dpc,
            c,
            eps: None,
            core_threshold: None,
        }
    }

    pub fn set(&mut self, axis: Axis, value: f64) {
        match axis {
            Axis::Eps => self.eps = Some(value),
            Axis::C => self.c = Some(value as usize),
            Axis::CoreThreshold => self.core_threshold = Some(value),
            Axis::K | Axis::H => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig::from_json(r#"{"density":"kd-sym","eps":0.5,"h":1.0}"#).unwrap();
        let flags = RunConfig {
            eps: Some(0.7),
            ..Default::default()
        };
        let cfg = file.overlay(flags);
        assert_eq!(cfg.eps, Some(0.7));
        assert_eq!(cfg.h, Some(1.0));
        assert_eq!(cfg.density, Some(DensityChoice::KdSym));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::from_json(r#"{"epsilon":0.5}"#).is_err());
    }

    #[test]
    fn missing_field_is_named() {
        let cfg = RunConfig::from_json(r#"{"density":"kd-sym"}"#).unwrap();
        let err = cfg.density_params().unwrap().validate().unwrap_err();
        assert!(err.to_string().contains("eps"), "{err}");
        assert_eq!(err.exit_code(), 1);
        let cfg = RunConfig::from_json(r#"{"density":"lc","eps":1.0}"#).unwrap();
        assert!(cfg
            .density_params()
            .unwrap()
            .validate()
            .unwrap_err()
            .to_string()
            .contains("`k`"));
    }

    #[test]
    fn out_of_range_values_are_named() {
        let base = DensityParams {
            eps: Some(0.5),
            ..DensityParams::new(DensityChoice::KdSym)
        };
        assert!(base.validate().is_ok());
        let cases = [
            (
                "eps",
                DensityParams {
                    eps: Some(-0.5),
                    ..base
                },
            ),
            (
                "eps",
                DensityParams {
                    eps: Some(f64::NAN),
                    ..base
                },
            ),
            ("h", DensityParams { h: 0.0, ..base }),
            ("tol", DensityParams { tol: -1.0, ..base }),
            ("max_iter", DensityParams { max_iter: 0, ..base }),
            (
                "damping",
                DensityParams {
                    damping: Some(1.0),
                    ..base
                },
            ),
            (
                "k",
                DensityParams {
                    k: Some(0),
                    ..DensityParams::new(DensityChoice::FkdAsym)
                },
            ),
        ];
        for (field, params) in cases {
            let err = params.validate().unwrap_err();
            assert!(err.to_string().contains(&format!("`{field}`")), "{err}");
            assert_eq!(err.exit_code(), 1);
        }
        let naive = DensityParams {
            eps: Some(1.0),
            h: -3.0,
            ..DensityParams::new(DensityChoice::Naive)
        };
        assert!(naive.validate().is_ok());
    }

    #[test]
    fn default_bandwidth() {
        let cfg = RunConfig::from_json(r#"{"density":"kd-asym","k":5}"#).unwrap();
        assert_eq!(cfg.density_params().unwrap().h, 0.5);
    }

    #[test]
    fn parse_choices() {
        for d in DensityChoice::ALL {
            assert_eq!(d.as_str().parse::<DensityChoice>().unwrap(), d);
        }
        assert!("kd".parse::<DensityChoice>().is_err());
        assert_eq!("core-threshold".parse::<Axis>().unwrap(), Axis::CoreThreshold);
    }
}
