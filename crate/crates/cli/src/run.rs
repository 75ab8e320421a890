//! Sampling, export and the run manifest.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use smectic::analytic::{bps_edge_u, linear_edge_u, linear_screw_u, EdgeSolutionParams};
use smectic::energy::{self, Branch};
use smectic::export;
use smectic::flow::{self, LayerCurve};
use smectic::geometry::{self, LayerGeometry, DEFAULT_NORMAL_EPS};
use smectic::spectral::{self, SpectralField};
use smectic::topology::DefectLine;
use smectic::{GridSpec, ScalarField3, VectorField3};

use crate::scenario::{Field, Format, GammaBranch, Output, Scenario, Seed, Solution, FORMAT_VERSION};
use crate::CliError;

fn numerical(op: &'static str) -> impl Fn(smectic::Error) -> CliError {
    move |source| CliError::Numerical { op, source }
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: String,
    pub field: Field,
    pub format: Format,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub program_version: &'static str,
    pub format_version: u32,
    pub lambda: f64,
    pub scenario: Scenario,
    pub warnings: Vec<String>,
    pub artifacts: Vec<Artifact>,
}

/// Effective Burgers vector of a line; reversing the line direction flips it.
fn effective_burgers(d: &DefectLine, a: f64) -> f64 {
    d.axis_sign().unwrap_or(1.0) * d.burgers(a)
}

/// Displacement of the analytic solutions, summed over the defect lines.
fn sample_u(s: &Scenario, grid: GridSpec) -> Result<ScalarField3, CliError> {
    let a = s.material.a;
    let lambda = s.material.lambda();
    let lines: Vec<(DefectLine, f64)> = s.defects.iter().map(|d| (*d, effective_burgers(d, a))).collect();
    let solution = s.solution;
    let f = move |p: [f64; 3]| -> smectic::Result<f64> {
        let mut u = 0.0;
        for (d, b) in &lines {
            let (x, y, z) = (p[0] - d.anchor[0], p[1] - d.anchor[1], p[2] - d.anchor[2]);
            u += match solution {
                Solution::LinearEdge => linear_edge_u(x, z, &EdgeSolutionParams::new(*b, lambda)?)?,
                Solution::BpsEdge => bps_edge_u(x, z, &EdgeSolutionParams::new(*b, lambda)?)?,
                Solution::LinearScrew | Solution::Helicoid => linear_screw_u(x, y, *b)?,
                Solution::Spectral | Solution::Flow => unreachable!("not an analytic solution"),
            };
        }
        Ok(u)
    };
    ScalarField3::from_fn_masked(grid, f, |_| false).map_err(numerical("analytic::sample_u"))
}

/// Lazily computed fields of one run.
struct Fields<'a> {
    s: &'a Scenario,
    u: Option<ScalarField3>,
    phi: Option<ScalarField3>,
    geo: Option<LayerGeometry>,
    density: Option<SpectralField>,
    grad_u: Option<VectorField3>,
    stack: Option<Vec<LayerCurve>>,
}

impl<'a> Fields<'a> {
    fn new(s: &'a Scenario) -> Self {
        Fields {
            s,
            u: None,
            phi: None,
            geo: None,
            density: None,
            grad_u: None,
            stack: None,
        }
    }

    fn grid(&self) -> GridSpec {
        self.s.grid.expect("validated: grid present")
    }

    fn u(&mut self) -> Result<&ScalarField3, CliError> {
        if self.u.is_none() {
            self.u = Some(sample_u(self.s, self.grid())?);
        }
        Ok(self.u.as_ref().unwrap())
    }

    /// `Phi = z - u` on the mask of `u`.
    fn phi(&mut self) -> Result<&ScalarField3, CliError> {
        if self.phi.is_none() {
            let u = self.u()?;
            let values = u.values.iter().enumerate().map(|(i, v)| u.grid.point_of(i)[2] - v).collect();
            let phi = ScalarField3::new(u.grid, values, u.mask.clone()).map_err(numerical("grid::phase_field"))?;
            self.phi = Some(phi);
        }
        Ok(self.phi.as_ref().unwrap())
    }

    fn geo(&mut self) -> Result<&LayerGeometry, CliError> {
        if self.geo.is_none() {
            let phi = self.phi()?;
            let g = LayerGeometry::compute(phi, DEFAULT_NORMAL_EPS).map_err(numerical("geometry::compute"))?;
            self.geo = Some(g);
        }
        Ok(self.geo.as_ref().unwrap())
    }

    fn density(&mut self) -> Result<&SpectralField, CliError> {
        if self.density.is_none() {
            let m = spectral::defect_spectrum(&self.s.defects, &self.grid(), self.s.material.a)
                .map_err(numerical("spectral::defect_spectrum"))?;
            self.density = Some(m);
        }
        Ok(self.density.as_ref().unwrap())
    }

    fn grad_u(&mut self) -> Result<&VectorField3, CliError> {
        if self.grad_u.is_none() {
            let g = if self.s.solution == Solution::Spectral {
                let material = self.s.material;
                let m = self.density()?;
                spectral::solve_linear(m, &material).map_err(numerical("spectral::solve_linear"))?.grad_u
            } else {
                smectic::fd::gradient(self.u()?).map_err(numerical("fd::gradient"))?
            };
            self.grad_u = Some(g);
        }
        Ok(self.grad_u.as_ref().unwrap())
    }

    fn stack(&mut self) -> Result<&[LayerCurve], CliError> {
        if self.stack.is_none() {
            let opts = self.s.flow_options.as_ref().expect("validated: flow options present");
            let m = &self.s.material;
            let seed = match opts.seed {
                Seed::Flat { x0, x1, z, n_points } => LayerCurve::flat(x0, x1, z, n_points, 0.0),
                Seed::Circle {
                    centre,
                    radius,
                    n_points,
                } => LayerCurve::circle(centre, radius, n_points, 0.0),
                Seed::BpsLevel {
                    burgers,
                    level,
                    x0,
                    x1,
                    n_points,
                } => EdgeSolutionParams::new(burgers, m.lambda())
                    .and_then(|p| LayerCurve::bps_level(&p, m.a, level, x0, x1, n_points)),
            }
            .map_err(numerical("flow::seed"))?;
            let stack =
                flow::generate_stack(&seed, m, opts.n_layers, opts.dn).map_err(numerical("flow::generate_stack"))?;
            self.stack = Some(stack);
        }
        Ok(self.stack.as_deref().unwrap())
    }

    fn scalar(&mut self, field: Field) -> Result<ScalarField3, CliError> {
        let material = self.s.material;
        Ok(match field {
            Field::U => self.u()?.clone(),
            Field::Phi => self.phi()?.clone(),
            Field::MeanCurvature => self.geo()?.mean_curvature(),
            Field::GaussianCurvature => self.geo()?.gaussian_curvature().map_err(numerical("geometry::gaussian_curvature"))?,
            Field::Gamma => {
                let branch = match self.s.gamma_branch {
                    GammaBranch::Lower => Branch::Lower,
                    GammaBranch::Upper => Branch::Upper,
                };
                energy::gamma_field_branch(self.phi()?, &material, branch)
                    .map_err(numerical("energy::gamma_field"))?
                    .values
            }
            Field::ElResidual => energy::el_residual(self.phi()?, &material).map_err(numerical("energy::el_residual"))?,
            Field::Strain => geometry::strain_fields(self.phi()?).map_err(numerical("geometry::strain_fields"))?.0,
            Field::StrainAlt => geometry::strain_fields(self.phi()?).map_err(numerical("geometry::strain_fields"))?.1,
            _ => unreachable!("not a scalar field"),
        })
    }

    fn energy_json(&mut self) -> Result<String, CliError> {
        let material = self.s.material;
        let lambda = material.lambda();
        let value = if self.s.solution == Solution::Spectral {
            let m = self.density()?;
            let e = spectral::spectral_energy(m, &material).map_err(numerical("spectral::spectral_energy"))?;
            serde_json::json!({ "lambda": lambda, "spectral": e })
        } else {
            let nonlinear = energy::full_energy(self.phi()?, &material).map_err(numerical("energy::full_energy"))?;
            let linear = energy::linear_energy(self.u()?, &material).map_err(numerical("energy::linear_energy"))?;
            serde_json::json!({ "lambda": lambda, "nonlinear": nonlinear, "linear": linear })
        };
        Ok(serde_json::to_string_pretty(&value).expect("plain data serializes") + "\n")
    }

    fn render(&mut self, o: &Output) -> Result<Vec<u8>, CliError> {
        let io = numerical("export::write");
        let mut buf = Vec::new();
        match (o.field, o.format) {
            (Field::Energy, _) => buf = self.energy_json()?.into_bytes(),
            (Field::Spectrum, _) => export::write_spectrum_csv(&mut buf, self.density()?).map_err(io)?,
            (Field::Stack, Format::Csv) => export::write_stack_csv(&mut buf, self.stack()?).map_err(io)?,
            (Field::Stack, _) => export::write_stack_vtk(&mut buf, self.stack()?).map_err(io)?,
            (Field::GradU, Format::Csv) => export::write_vector_csv(&mut buf, self.grad_u()?).map_err(io)?,
            (Field::GradU, _) => export::write_vector_vtk(&mut buf, self.grad_u()?, "grad_u").map_err(io)?,
            (Field::Normal, Format::Csv) => export::write_vector_csv(&mut buf, &self.geo()?.normal).map_err(io)?,
            (Field::Normal, _) => export::write_vector_vtk(&mut buf, &self.geo()?.normal, "normal").map_err(io)?,
            (f, Format::Csv) => export::write_scalar_csv(&mut buf, &self.scalar(f)?).map_err(io)?,
            (f, _) => export::write_scalar_vtk(&mut buf, &self.scalar(f)?, vtk_name(f)).map_err(io)?,
        }
        Ok(buf)
    }
}

fn vtk_name(f: Field) -> &'static str {
    match f {
        Field::Phi => "phi",
        Field::U => "u",
        Field::MeanCurvature => "mean_curvature",
        Field::GaussianCurvature => "gaussian_curvature",
        Field::Gamma => "gamma",
        Field::ElResidual => "el_residual",
        Field::Strain => "strain",
        Field::StrainAlt => "strain_alt",
        _ => "value",
    }
}

fn write_file(dir: &Path, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(path.clone(), e))?;
    }
    fs::write(&path, bytes).map_err(|e| CliError::Io(path, e))
}

/// Computes every requested output, writes it under `out_dir`, then writes
/// the manifest.
pub fn run(s: &Scenario, out_dir: &Path) -> Result<Manifest, CliError> {
    let mut fields = Fields::new(s);
    let mut artifacts = Vec::with_capacity(s.outputs.len());
    for o in &s.outputs {
        let bytes = fields.render(o)?;
        write_file(out_dir, &o.path, &bytes)?;
        artifacts.push(Artifact {
            path: o.path.clone(),
            field: o.field,
            format: o.format,
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        program_version: env!("CARGO_PKG_VERSION"),
        format_version: FORMAT_VERSION,
        lambda: s.material.lambda(),
        scenario: s.clone(),
        warnings: s.warnings(),
        artifacts,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("plain data serializes") + "\n";
    write_file(out_dir, &s.manifest, text.as_bytes())?;
    Ok(manifest)
}
