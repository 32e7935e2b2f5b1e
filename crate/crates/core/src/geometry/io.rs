//! CSV field files and JSON domain specifications.
//!
//! A field file starts with `# dim=<N> shape=<n1,...> bbox=<lo1,hi1,...>` and
//! then holds one value per line in row-major order.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Domain, Grid, ScalarField};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct CsvHeader {
    pub dim: usize,
    pub shape: Vec<usize>,
    pub bbox: Vec<(f64, f64)>,
}

impl CsvHeader {
    pub fn of_grid<S: Scalar>(g: &Grid<S>) -> Self {
        Self {
            dim: g.dim(),
            shape: g.shape().to_vec(),
            bbox: g
                .lo()
                .iter()
                .zip(g.hi())
                .map(|(&l, &h)| (to_f64(l), to_f64(h)))
                .collect(),
        }
    }

    pub fn grid<S: Scalar>(&self) -> Result<Grid<S>> {
        let bbox: Vec<(S, S)> = self.bbox.iter().map(|&(l, h)| (lit(l), lit(h))).collect();
        Grid::new(&bbox, &self.shape)
    }

    fn parse(line: &str) -> Result<Self> {
        let body = line
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("field file must start with a '#' header".into()))?;
        let (mut dim, mut shape, mut bbox) = (None, None, None);
        for tok in body.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
            match k {
                "dim" => dim = Some(parse_num::<usize>(v)?),
                "shape" => shape = Some(parse_list::<usize>(v)?),
                "bbox" => bbox = Some(parse_list::<f64>(v)?),
                _ => {}
            }
        }
        let dim = dim.ok_or_else(|| Error::Parse("header lacks dim".into()))?;
        let shape = shape.ok_or_else(|| Error::Parse("header lacks shape".into()))?;
        let flat = bbox.ok_or_else(|| Error::Parse("header lacks bbox".into()))?;
        if shape.len() != dim || flat.len() != 2 * dim {
            return Err(Error::Parse("header dim, shape and bbox disagree".into()));
        }
        let bbox = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        Ok(Self { dim, shape, bbox })
    }

    fn render(&self) -> String {
        let shape: Vec<String> = self.shape.iter().map(|n| n.to_string()).collect();
        let bbox: Vec<String> = self
            .bbox
            .iter()
            .flat_map(|&(l, h)| [l.to_string(), h.to_string()])
            .collect();
        format!("# dim={} shape={} bbox={}", self.dim, shape.join(","), bbox.join(","))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse number `{s}`")))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(parse_num).collect()
}

/// Reads a header and raw values (as f64).
pub fn read_csv_raw(path: impl AsRef<Path>) -> Result<(CsvHeader, Vec<f64>)> {
    let file = fs::File::open(path.as_ref())?;
    let mut lines = BufReader::new(file).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty field file".into()))??;
    let header = CsvHeader::parse(&first)?;
    let mut values = Vec::with_capacity(header.shape.iter().product());
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        values.push(parse_num::<f64>(t)?);
    }
    let expect: usize = header.shape.iter().product();
    if values.len() != expect {
        return Err(Error::Parse(format!(
            "expected {expect} values, found {}",
            values.len()
        )));
    }
    Ok((header, values))
}

/// Reads a field onto `domain`, whose grid must match the file header.
pub fn read_field<S: Scalar>(path: impl AsRef<Path>, domain: &Arc<Domain<S>>) -> Result<ScalarField<S>> {
    let (header, values) = read_csv_raw(path)?;
    let grid: Grid<S> = header.grid()?;
    if grid != *domain.grid() {
        return Err(Error::GridMismatch);
    }
    ScalarField::new(domain.clone(), values.into_iter().map(lit).collect())
}

/// Reads a field and the open box domain described by its header.
pub fn read_field_on_box<S: Scalar>(path: impl AsRef<Path>) -> Result<ScalarField<S>> {
    let (header, values) = read_csv_raw(path)?;
    let domain = Domain::boxed(header.grid()?)?.into_arc();
    ScalarField::new(domain, values.into_iter().map(lit).collect())
}

pub fn write_field<S: Scalar>(field: &ScalarField<S>, mut out: impl Write) -> Result<()> {
    writeln!(out, "{}", CsvHeader::of_grid(field.grid()).render())?;
    for &v in field.values() {
        writeln!(out, "{}", to_f64(v))?;
    }
    Ok(())
}

pub fn write_field_file<S: Scalar>(field: &ScalarField<S>, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_field(field, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

/// Boundary portion Γ: either a field file (nonzero marks Γ) or a list of box
/// faces such as `"x0-"`, `"x1+"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Path(String),
    Faces(Vec<String>),
}

/// JSON domain description:
/// `{"kind":"box"|"ball"|"mask", "bbox":[lo1,hi1,...], "resolution":[n1,...],
///   "delta":<field path or null>, "gamma":<spec or null>, "mask":<field path>}`.
///
/// Δ is the set of inside nodes where the delta field is exactly zero; a mask
/// field marks Ω by positive values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: String,
    pub bbox: Vec<f64>,
    pub resolution: Vec<usize>,
    #[serde(default)]
    pub delta: Option<String>,
    #[serde(default)]
    pub gamma: Option<GammaSpec>,
    #[serde(default)]
    pub mask: Option<String>,
}

impl DomainSpec {
    pub fn unit_box(dim: usize, n: usize) -> Self {
        Self {
            kind: "box".into(),
            bbox: (0..dim).flat_map(|_| [0.0, 1.0]).collect(),
            resolution: vec![n; dim],
            delta: None,
            gamma: None,
            mask: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn grid<S: Scalar>(&self) -> Result<Grid<S>> {
        if self.bbox.len() != 2 * self.resolution.len() {
            return Err(Error::InvalidDomain("bbox needs two numbers per axis".into()));
        }
        let bbox: Vec<(S, S)> = self.bbox.chunks(2).map(|c| (lit(c[0]), lit(c[1]))).collect();
        Grid::new(&bbox, &self.resolution)
    }

    pub fn build<S: Scalar>(&self) -> Result<Domain<S>> {
        let grid = self.grid::<S>()?;
        let mut domain = match self.kind.as_str() {
            "box" => Domain::boxed(grid)?,
            "ball" => Domain::ball(grid)?,
            "mask" => {
                let path = self
                    .mask
                    .as_ref()
                    .ok_or_else(|| Error::InvalidDomain("mask domain needs a \"mask\" field path".into()))?;
                let (h, v) = read_csv_raw(path)?;
                if h.grid::<S>()? != grid {
                    return Err(Error::GridMismatch);
                }
                Domain::mask(grid, v.iter().map(|&x| x > 0.0).collect())?
            }
            other => return Err(Error::InvalidDomain(format!("unknown domain kind `{other}`"))),
        };
        if let Some(path) = &self.delta {
            let (h, v) = read_csv_raw(path)?;
            if h.grid::<S>()? != *domain.grid() {
                return Err(Error::GridMismatch);
            }
            domain = domain.with_delta(v.iter().map(|&x| x == 0.0).collect())?;
        }
        if let Some(g) = &self.gamma {
            let mask = gamma_mask(&domain, g)?;
            domain = domain.with_gamma(mask)?;
        }
        Ok(domain)
    }
}

fn gamma_mask<S: Scalar>(domain: &Domain<S>, spec: &GammaSpec) -> Result<Vec<bool>> {
    let g = domain.grid();
    match spec {
        GammaSpec::Path(p) => {
            let (h, v) = read_csv_raw(p)?;
            if h.grid::<S>()? != *g {
                return Err(Error::GridMismatch);
            }
            Ok(v.iter()
                .enumerate()
                .map(|(i, &x)| x != 0.0 && !domain.is_inside(i))
                .collect())
        }
        GammaSpec::Faces(faces) => {
            let mut mask = vec![false; g.len()];
            for face in faces {
                let (axis, upper) = parse_face(face, g.dim())?;
                for (i, m) in mask.iter_mut().enumerate() {
                    let k = g.multi_index(i)[axis];
                    let hit = if upper { k + 1 == g.shape()[axis] } else { k == 0 };
                    if hit && !domain.is_inside(i) {
                        *m = true;
                    }
                }
            }
            Ok(mask)
        }
    }
}

fn parse_face(face: &str, dim: usize) -> Result<(usize, bool)> {
    let bad = || Error::InvalidDomain(format!("bad face `{face}` (expected e.g. x0- or x1+)"));
    let rest = face.strip_prefix('x').ok_or_else(bad)?;
    let (num, sign) = rest.split_at(rest.len().saturating_sub(1));
    let axis: usize = num.parse().map_err(|_| bad())?;
    if axis >= dim {
        return Err(bad());
    }
    match sign {
        "+" => Ok((axis, true)),
        "-" => Ok((axis, false)),
        _ => Err(bad()),
    }
}
