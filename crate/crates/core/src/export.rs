//! Plain-text writers: CSV (round-trip precision) and legacy ASCII VTK.

use std::io::Write;

use crate::error::Result;
use crate::flow::LayerCurve;
use crate::grid::{ScalarField3, VectorField3};
use crate::spectral::SpectralField;

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// `x,y,z,value,mask` per node, x fastest.
pub fn write_scalar_csv<W: Write>(out: &mut W, f: &ScalarField3) -> Result<()> {
    writeln!(out, "x,y,z,value,mask")?;
    for (i, v) in f.values.iter().enumerate() {
        let p = f.grid.point_of(i);
        writeln!(out, "{},{},{},{},{}", num(p[0]), num(p[1]), num(p[2]), num(*v), u8::from(f.mask[i]))?;
    }
    Ok(())
}

pub fn write_vector_csv<W: Write>(out: &mut W, f: &VectorField3) -> Result<()> {
    writeln!(out, "x,y,z,vx,vy,vz,mask")?;
    for (i, v) in f.values.iter().enumerate() {
        let p = f.grid.point_of(i);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            num(p[0]),
            num(p[1]),
            num(p[2]),
            num(v[0]),
            num(v[1]),
            num(v[2]),
            u8::from(f.mask[i])
        )?;
    }
    Ok(())
}

fn vtk_header<W: Write>(out: &mut W, title: &str, f_grid: &crate::grid::GridSpec) -> Result<()> {
    let g = f_grid;
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET STRUCTURED_POINTS")?;
    writeln!(out, "DIMENSIONS {} {} {}", g.extents[0], g.extents[1], g.extents[2])?;
    writeln!(out, "ORIGIN {} {} {}", num(g.origin[0]), num(g.origin[1]), num(g.origin[2]))?;
    writeln!(out, "SPACING {} {} {}", num(g.spacing[0]), num(g.spacing[1]), num(g.spacing[2]))?;
    writeln!(out, "POINT_DATA {}", g.len())?;
    Ok(())
}

fn vtk_mask<W: Write>(out: &mut W, mask: &[bool]) -> Result<()> {
    writeln!(out, "SCALARS mask int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for m in mask {
        writeln!(out, "{}", u8::from(*m))?;
    }
    Ok(())
}

/// Masked values are written as NaN.
pub fn write_scalar_vtk<W: Write>(out: &mut W, f: &ScalarField3, name: &str) -> Result<()> {
    vtk_header(out, name, &f.grid)?;
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for (v, m) in f.values.iter().zip(&f.mask) {
        writeln!(out, "{}", if *m { "nan".to_string() } else { num(*v) })?;
    }
    vtk_mask(out, &f.mask)
}

pub fn write_vector_vtk<W: Write>(out: &mut W, f: &VectorField3, name: &str) -> Result<()> {
    vtk_header(out, name, &f.grid)?;
    writeln!(out, "VECTORS {name} double")?;
    for (v, m) in f.values.iter().zip(&f.mask) {
        if *m {
            writeln!(out, "nan nan nan")?;
        } else {
            writeln!(out, "{} {} {}", num(v[0]), num(v[1]), num(v[2]))?;
        }
    }
    vtk_mask(out, &f.mask)
}

/// `qx,qy,qz` followed by real and imaginary parts of each component.
pub fn write_spectrum_csv<W: Write>(out: &mut W, s: &SpectralField) -> Result<()> {
    let mut header = String::from("qx,qy,qz");
    for c in 0..s.components() {
        header.push_str(&format!(",re{c},im{c}"));
    }
    writeln!(out, "{header}")?;
    for idx in 0..s.grid.len() {
        let q = s.wavevector(idx);
        let mut line = format!("{},{},{}", num(q[0]), num(q[1]), num(q[2]));
        for comp in &s.coeffs {
            line.push_str(&format!(",{},{}", num(comp[idx].re), num(comp[idx].im)));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// `n,x,z` rows for every point of every layer.
pub fn write_stack_csv<W: Write>(out: &mut W, stack: &[LayerCurve]) -> Result<()> {
    writeln!(out, "n,x,z")?;
    for c in stack {
        for p in &c.points {
            writeln!(out, "{},{},{}", num(c.layer_index), num(p[0]), num(p[1]))?;
        }
    }
    Ok(())
}

/// All layers as polylines in one POLYDATA file, placed at `y = 0`.
pub fn write_stack_vtk<W: Write>(out: &mut W, stack: &[LayerCurve]) -> Result<()> {
    let total: usize = stack.iter().map(|c| c.points.len()).sum();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "layer stack")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET POLYDATA")?;
    writeln!(out, "POINTS {total} double")?;
    for c in stack {
        for p in &c.points {
            writeln!(out, "{} 0 {}", num(p[0]), num(p[1]))?;
        }
    }
    let sizes: usize = stack.iter().map(|c| c.points.len() + usize::from(c.closed) + 1).sum();
    writeln!(out, "LINES {} {sizes}", stack.len())?;
    let mut offset = 0;
    for c in stack {
        let n = c.points.len();
        let mut line = format!("{}", n + usize::from(c.closed));
        for i in 0..n {
            line.push_str(&format!(" {}", offset + i));
        }
        if c.closed {
            line.push_str(&format!(" {offset}"));
        }
        writeln!(out, "{line}")?;
        offset += n;
    }
    writeln!(out, "CELL_DATA {}", stack.len())?;
    writeln!(out, "SCALARS layer double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for c in stack {
        writeln!(out, "{}", num(c.layer_index))?;
    }
    Ok(())
}
