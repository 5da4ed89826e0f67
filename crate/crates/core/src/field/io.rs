//! Field exchange: node CSV `x,y,u` with a TOML sidecar describing the
//! grid, the norm and the domain; profile CSV `t,mu,lambda,lambda_prime,mu_prime`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::anorm::NormSpec;
use crate::convex_geom::ConvexCurve;
use crate::error::{Error, Result};
use crate::geom::Vec2;

use super::{Grid, LevelSetProfile, ScalarField};

/// Sidecar descriptor of a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldDescriptor {
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    /// Counterclockwise vertices of `∂Ω`.
    pub boundary: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct NodeRow {
    x: f64,
    y: f64,
    u: f64,
}

/// Writes node values and returns the sidecar text.
pub fn write_field<W: Write>(field: &ScalarField, norm: Option<NormSpec>, csv_out: W) -> Result<String> {
    let g = field.grid();
    let mut w = csv::Writer::from_writer(csv_out);
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.node(i, j);
            w.serialize(NodeRow {
                x: p.x,
                y: p.y,
                u: field.node_value(i, j),
            })?;
        }
    }
    w.flush()?;
    let desc = FieldDescriptor {
        grid: *g,
        norm,
        boundary: field.boundary().vertices().iter().map(|v| [v.x, v.y]).collect(),
    };
    toml::to_string(&desc).map_err(|e| Error::Parse(format!("sidecar serialization: {e}")))
}

/// Reads a grid-only field; every grid node must appear exactly once.
pub fn read_field<R: Read>(csv_in: R, sidecar: &str) -> Result<(ScalarField, FieldDescriptor)> {
    let desc: FieldDescriptor =
        toml::from_str(sidecar).map_err(|e| Error::Parse(format!("field sidecar: {e}")))?;
    let g = desc.grid;
    if g.nx < 4 || g.ny < 4 || !(g.spacing.is_finite() && g.spacing > 0.0) || !g.origin.is_finite() {
        return Err(Error::Parse("sidecar grid must be at least 4×4 with positive spacing".into()));
    }
    let boundary = ConvexCurve::new(desc.boundary.iter().map(|p| Vec2::new(p[0], p[1])).collect())?;
    let mut values = vec![f64::NAN; g.len()];
    let mut rdr = csv::Reader::from_reader(csv_in);
    for row in rdr.deserialize() {
        let row: NodeRow = row?;
        let fi = (row.x - g.origin.x) / g.spacing;
        let fj = (row.y - g.origin.y) / g.spacing;
        let (i, j) = (fi.round(), fj.round());
        if (fi - i).abs() > 1e-6 || (fj - j).abs() > 1e-6 || i < 0.0 || j < 0.0 {
            return Err(Error::Parse(format!("node ({}, {}) is off the grid", row.x, row.y)));
        }
        let (i, j) = (i as usize, j as usize);
        if i >= g.nx || j >= g.ny {
            return Err(Error::Parse(format!("node ({}, {}) is outside the grid", row.x, row.y)));
        }
        let k = g.index(i, j);
        if !values[k].is_nan() {
            return Err(Error::Parse(format!("node ({i}, {j}) appears twice")));
        }
        values[k] = row.u;
    }
    if let Some(k) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::Parse(format!("node ({}, {}) is missing", k % g.nx, k / g.nx)));
    }
    Ok((ScalarField::from_grid(g, values, boundary)?, desc))
}

#[derive(Serialize, Deserialize)]
struct ProfileRow {
    t: f64,
    mu: f64,
    lambda: f64,
    lambda_prime: f64,
    mu_prime: f64,
}

pub fn write_profile_csv<W: Write>(p: &LevelSetProfile, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for k in 0..p.len() {
        w.serialize(ProfileRow {
            t: p.levels[k],
            mu: p.mu[k],
            lambda: p.lambda[k],
            lambda_prime: p.lambda_prime[k],
            mu_prime: p.mu_prime[k],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the table columns back; `max_value`, `max_grad` and `cell_area`
/// are not part of the CSV and are supplied by the caller.
pub fn read_profile_csv<R: Read>(input: R, max_value: f64, max_grad: f64, cell_area: f64) -> Result<LevelSetProfile> {
    let mut p = LevelSetProfile {
        levels: Vec::new(),
        mu: Vec::new(),
        lambda: Vec::new(),
        lambda_prime: Vec::new(),
        mu_prime: Vec::new(),
        max_value,
        max_grad,
        cell_area,
    };
    for row in csv::Reader::from_reader(input).deserialize() {
        let r: ProfileRow = row?;
        p.levels.push(r.t);
        p.mu.push(r.mu);
        p.lambda.push(r.lambda);
        p.lambda_prime.push(r.lambda_prime);
        p.mu_prime.push(r.mu_prime);
    }
    Ok(p)
}
