//! Scenario files: strict JSON, validated before any computation starts.

use std::path::Path;

use serde::{Deserialize, Serialize};
use smectic::topology::{DefectKind, DefectLine};
use smectic::{GridSpec, MaterialParams};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solution {
    LinearEdge,
    LinearScrew,
    BpsEdge,
    Helicoid,
    Spectral,
    Flow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Field {
    Phi,
    U,
    GradU,
    Normal,
    MeanCurvature,
    GaussianCurvature,
    Gamma,
    ElResidual,
    Strain,
    StrainAlt,
    Energy,
    Spectrum,
    Stack,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Vtk,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GammaBranch {
    /// `1 - |grad Phi| - lambda div N`.
    #[default]
    Lower,
    /// `1 - |grad Phi| + lambda div N`.
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub field: Field,
    pub format: Format,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Seed {
    Flat { x0: f64, x1: f64, z: f64, n_points: usize },
    Circle { centre: [f64; 2], radius: f64, n_points: usize },
    /// Level `level * a` of the nonlinear edge solution with Burgers vector `burgers`.
    BpsLevel { burgers: f64, level: f64, x0: f64, x1: f64, n_points: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowOptions {
    pub seed: Seed,
    pub n_layers: usize,
    pub dn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    #[serde(default)]
    pub material: MaterialParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub defects: Vec<DefectLine>,
    pub solution: Solution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_options: Option<FlowOptions>,
    #[serde(default)]
    pub gamma_branch: GammaBranch,
    pub outputs: Vec<Output>,
    #[serde(default = "default_manifest")]
    pub manifest: String,
}

fn default_manifest() -> String {
    "manifest.json".to_string()
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let s: Scenario = serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        s.validate()?;
        Ok(s)
    }

    /// Field/format combinations each solution can produce.
    fn supports(&self, o: &Output) -> bool {
        use Field::*;
        let grid_field = matches!(
            o.field,
            Phi | U | GradU | Normal | MeanCurvature | GaussianCurvature | Gamma | ElResidual | Strain | StrainAlt
        );
        let format_ok = match o.field {
            Energy => o.format == Format::Json,
            Spectrum => o.format == Format::Csv,
            Stack => o.format != Format::Json,
            _ => o.format != Format::Json,
        };
        let field_ok = match self.solution {
            Solution::Flow => o.field == Stack,
            Solution::Spectral => matches!(o.field, GradU | Energy | Spectrum),
            _ => grid_field || o.field == Energy,
        };
        format_ok && field_ok
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.version != FORMAT_VERSION {
            return Err(config(format!("version: expected {FORMAT_VERSION}, found {}", self.version)));
        }
        self.material.validate().map_err(|e| config(format!("material: {e}")))?;
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| config(format!("grid: {e}")))?;
        } else if self.solution != Solution::Flow {
            return Err(config("grid: required for this solution"));
        }
        for (i, d) in self.defects.iter().enumerate() {
            d.validate().map_err(|e| config(format!("defects[{i}]: {e}")))?;
            if d.axis_sign().is_none() {
                return Err(config(format!("defects[{i}].direction: must be the kind's grid axis, up to sign")));
            }
        }
        let count = |k: DefectKind| self.defects.iter().filter(|d| d.kind == k).count();
        let (edges, screws) = (count(DefectKind::Edge), count(DefectKind::Screw));
        match self.solution {
            Solution::LinearEdge if screws > 0 => return Err(config("defects: linear-edge takes edge lines only")),
            Solution::LinearScrew if edges > 0 => return Err(config("defects: linear-screw takes screw lines only")),
            Solution::BpsEdge if !(edges == 1 && screws == 0) => {
                return Err(config("defects: bps-edge takes exactly one edge line"))
            }
            Solution::Helicoid if !(screws == 1 && edges == 0) => {
                return Err(config("defects: helicoid takes exactly one screw line"))
            }
            Solution::Spectral if self.defects.is_empty() => {
                return Err(config("defects: spectral needs at least one line"))
            }
            Solution::Flow if self.flow_options.is_none() => {
                return Err(config("flow_options: required when solution is flow"))
            }
            _ => {}
        }
        if let Some(f) = &self.flow_options {
            if self.solution != Solution::Flow {
                return Err(config("flow_options: only valid when solution is flow"));
            }
            if !(f.dn.is_finite() && f.dn != 0.0 && f.dn.abs() <= 1.0) {
                return Err(config("flow_options.dn: must be nonzero with |dn| <= 1"));
            }
        }
        if self.outputs.is_empty() {
            return Err(config("outputs: nothing requested"));
        }
        let mut paths = std::collections::BTreeSet::new();
        for (i, o) in self.outputs.iter().enumerate() {
            if !self.supports(o) {
                return Err(config(format!(
                    "outputs[{i}]: {:?} as {:?} is not available for solution {:?}",
                    o.field, o.format, self.solution
                )));
            }
            if o.path.is_empty() || Path::new(&o.path).is_absolute() {
                return Err(config(format!("outputs[{i}].path: must be a non-empty relative path")));
            }
            if !paths.insert(o.path.as_str()) || o.path == self.manifest {
                return Err(config(format!("outputs[{i}].path: `{}` is used twice", o.path)));
            }
        }
        Ok(())
    }

    /// Warnings that do not stop a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let Some(g) = &self.grid {
            let lambda = self.material.lambda();
            if g.min_spacing() > lambda / 8.0 {
                w.push(format!(
                    "grid spacing {} does not resolve lambda = {lambda} (want <= lambda / 8)",
                    g.min_spacing()
                ));
            }
        }
        w
    }

    /// Nonlinear edge at `b = 4 lambda` in default units.
    pub fn defaults() -> Self {
        let material = MaterialParams::default();
        Scenario {
            version: FORMAT_VERSION,
            material,
            grid: Some(GridSpec {
                origin: [-10.0, 0.0, 1.0],
                extents: [161, 4, 153],
                spacing: [0.125, 0.125, 0.125],
            }),
            defects: vec![DefectLine::new(DefectKind::Edge, -4, [0.0; 3]).expect("valid default")],
            solution: Solution::BpsEdge,
            flow_options: None,
            gamma_branch: GammaBranch::Upper,
            outputs: vec![
                Output {
                    field: Field::Phi,
                    format: Format::Vtk,
                    path: "phi.vtk".into(),
                },
                Output {
                    field: Field::Gamma,
                    format: Format::Csv,
                    path: "gamma.csv".into(),
                },
                Output {
                    field: Field::Energy,
                    format: Format::Json,
                    path: "energy.json".into(),
                },
            ],
            manifest: default_manifest(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let s = Scenario::defaults();
        s.validate().unwrap();
        assert!(s.warnings().is_empty());
        let text = serde_json::to_string_pretty(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut v = serde_json::to_value(Scenario::defaults()).unwrap();
        v["material"]["lambda"] = 1.0.into();
        let e = serde_json::from_value::<Scenario>(v).unwrap_err();
        assert!(e.to_string().contains("lambda"));
    }

    #[test]
    fn flow_needs_seed() {
        let mut s = Scenario::defaults();
        s.solution = Solution::Flow;
        s.defects.clear();
        s.outputs = vec![Output {
            field: Field::Stack,
            format: Format::Csv,
            path: "s.csv".into(),
        }];
        assert!(s.validate().is_err());
        s.flow_options = Some(FlowOptions {
            seed: Seed::Circle {
                centre: [0.0, 0.0],
                radius: 5.0,
                n_points: 64,
            },
            n_layers: 2,
            dn: 0.1,
        });
        s.validate().unwrap();
    }

    #[test]
    fn coarse_grid_warns() {
        let mut s = Scenario::defaults();
        s.grid.as_mut().unwrap().spacing = [0.5; 3];
        assert_eq!(s.warnings().len(), 1);
    }
}
