//! Experiment configuration: a TOML document with `[norm]`, `[domain]`,
//! `[field]`, `[resolution]`, `[suites]` and `[output]` sections.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use anisoperim_core::anorm::NormSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Geometry,
    Curvature,
    HessianIntegrals,
    Symmetrize,
    PolyaSzego,
    Compare,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Identities,
        Suite::Geometry,
        Suite::Curvature,
        Suite::HessianIntegrals,
        Suite::Symmetrize,
        Suite::PolyaSzego,
        Suite::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Geometry => "geometry",
            Suite::Curvature => "curvature",
            Suite::HessianIntegrals => "hessian-integrals",
            Suite::Symmetrize => "symmetrize",
            Suite::PolyaSzego => "polya-szego",
            Suite::Compare => "compare",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.name().replace('-', "_"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    /// The field's own domain.
    Field,
    /// Vertices `x y`, one per line.
    Polygon { path: PathBuf },
    Wulff { radius: f64 },
    /// Regular polygon with `sides` vertices on the unit circle.
    Regular { sides: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Preset { name: String },
    Csv { path: PathBuf, sidecar: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    /// Grid spacing.
    pub h: f64,
    pub n_levels: usize,
    /// Vertices of Wulff polygons.
    pub curve_n: usize,
    /// Nodes of the radial solver.
    pub quadrature_n: usize,
    /// Random samples for pointwise checks.
    pub samples: usize,
    pub seed: u64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            h: 1.0 / 256.0,
            n_levels: 64,
            curve_n: 8192,
            quadrature_n: 1024,
            samples: 100,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suites {
    pub run: Vec<Suite>,
}

impl Default for Suites {
    fn default() -> Self {
        Suites { run: Suite::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub svg: bool,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: PathBuf::from("anisoperim-out"),
            svg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub norm: NormSpec,
    #[serde(default = "default_domain")]
    pub domain: DomainSpec,
    pub field: FieldSpec,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub suites: Suites,
    #[serde(default)]
    pub output: Output,
}

fn default_domain() -> DomainSpec {
    DomainSpec::Field
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let c: ExperimentConfig = toml::from_str(text).context("malformed configuration")?;
        c.validate()?;
        Ok(c)
    }

    /// Reads a file, resolving relative paths inside it against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut c = ExperimentConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let DomainSpec::Polygon { path } = &mut c.domain {
            rebase(path);
        }
        if let FieldSpec::Csv { path, sidecar } = &mut c.field {
            rebase(path);
            rebase(sidecar);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        self.norm.build().context("invalid [norm]")?;
        let r = &self.resolution;
        if !(r.h.is_finite() && r.h >= 1.0 / 4096.0 && r.h <= 0.25) {
            bail!("resolution.h must lie in [1/4096, 1/4], got {}", r.h);
        }
        if !(8..=1024).contains(&r.n_levels) {
            bail!("resolution.n_levels must lie in [8, 1024], got {}", r.n_levels);
        }
        if !(64..=1 << 20).contains(&r.curve_n) {
            bail!("resolution.curve_n must lie in [64, 2^20], got {}", r.curve_n);
        }
        if !(64..=1 << 20).contains(&r.quadrature_n) {
            bail!("resolution.quadrature_n must lie in [64, 2^20], got {}", r.quadrature_n);
        }
        if !(1..=100_000).contains(&r.samples) {
            bail!("resolution.samples must lie in [1, 100000], got {}", r.samples);
        }
        if self.suites.run.is_empty() {
            bail!("suites.run selects no suite");
        }
        for (i, s) in self.suites.run.iter().enumerate() {
            if self.suites.run[..i].contains(s) {
                bail!("suite {} is listed twice", s.name());
            }
        }
        match &self.domain {
            DomainSpec::Wulff { radius } if !(radius.is_finite() && *radius > 0.0) => {
                bail!("domain.radius must be positive, got {radius}")
            }
            DomainSpec::Regular { sides } if *sides < 3 => bail!("domain.sides must be at least 3"),
            _ => {}
        }
        if let FieldSpec::Preset { name } = &self.field {
            name.parse::<anisoperim_core::manufactured::FieldPreset>()?;
        }
        Ok(())
    }
}

/// A named, ready-made experiment.
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "euclidean-disk-quadratic",
        description: "u = 1 − |x|² on the unit disk, Euclidean norm, every suite",
        toml: r#"
[norm]
kind = "euclidean"

[field]
kind = "preset"
name = "radial-quadratic"
"#,
    },
    Preset {
        name: "esempio-remark",
        description: "u = δ³ − d(x, Ω₀)³ on a rounded square, Euclidean norm: equality without symmetry",
        toml: r#"
[norm]
kind = "euclidean"

[field]
kind = "preset"
name = "distance-cube"

[suites]
run = ["identities", "geometry", "curvature", "hessian-integrals", "symmetrize", "polya-szego"]
"#,
    },
    Preset {
        name: "ellipse-rotated",
        description: "rotated off-center quadratic, elliptic norm with a = 2, b = 1",
        toml: r#"
[norm]
kind = "ellipse"
a = 2.0
b = 1.0

[domain]
kind = "wulff"
radius = 1.0

[field]
kind = "preset"
name = "rotated-ellipse"
"#,
    },
    Preset {
        name: "pnorm-pentagon",
        description: "rounded pentagon, ℓ⁴ norm",
        toml: r#"
[norm]
kind = "pnorm"
p = 4.0

[domain]
kind = "regular"
sides = 5

[field]
kind = "preset"
name = "soft-pentagon"
"#,
    },
];

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let Some(p) = PRESETS.iter().find(|p| p.name == name) else {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        bail!("unknown preset {name:?}; known presets: {}", known.join(", "));
    };
    let mut c = ExperimentConfig::parse(p.toml)?;
    c.output.dir = PathBuf::from(format!("anisoperim-{}", p.name));
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for p in PRESETS {
            let c = preset(p.name).unwrap();
            assert_eq!(c.resolution, Resolution::default());
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "[norm]\nkind = \"euclidean\"\n[field]\nkind = \"preset\"\nname = \"ellipse\"\n";
        assert!(ExperimentConfig::parse(base).is_ok());
        let p15 = base.replace("kind = \"euclidean\"", "kind = \"pnorm\"\np = 1.5");
        assert!(ExperimentConfig::parse(&p15).is_err());
        let unknown_suite = format!("{base}[suites]\nrun = [\"bogus\"]\n");
        assert!(ExperimentConfig::parse(&unknown_suite).is_err());
        let twice = format!("{base}[suites]\nrun = [\"compare\", \"compare\"]\n");
        assert!(ExperimentConfig::parse(&twice).is_err());
        let coarse = format!("{base}[resolution]\nh = 0.5\n");
        assert!(ExperimentConfig::parse(&coarse).is_err());
        let extra = format!("{base}[resolution]\nhh = 0.1\n");
        assert!(ExperimentConfig::parse(&extra).is_err());
        let field = base.replace("\"ellipse\"", "\"bogus\"");
        assert!(ExperimentConfig::parse(&field).is_err());
    }
}
