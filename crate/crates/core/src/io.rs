//! Text container for radial fields, eigenpairs and approximate-solution families.
//!
//! ```text
//! # inls-container 1
//! # kind = field
//! # d = 3
//! # b = 0.3
//! # n_cells = 2048
//! # r_max = 100
//! # stretch = sinh:6
//! # <extra key> = <value>
//! r,re_0,im_0[,re_1,im_1,...]
//! <one row per cell>
//! ```
//! Numbers use Rust's shortest round-trip formatting, so a write/read cycle is lossless.
//! Header keys after `stretch` are sorted.

use crate::approx::ApproxFamily;
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::grid::{GridKey, RadialGrid, Stretch};
use crate::groundstate::GroundState;
use crate::scalar::C;
use crate::spectral::{compute_eigen, EigenBundle, EigenOptions};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

const MAGIC: &str = "# inls-container 1";

#[derive(Clone, Debug, PartialEq)]
pub struct Container {
    pub kind: String,
    pub key: GridKey,
    pub b: f64,
    pub meta: BTreeMap<String, String>,
    pub r: Vec<f64>,
    pub columns: Vec<Vec<C<f64>>>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(format!("container: {}", msg.into()))
}

impl Container {
    pub fn new(kind: &str, grid: &RadialGrid<f64>, b: f64) -> Self {
        Container { kind: kind.into(), key: grid.key(), b, meta: BTreeMap::new(), r: grid.r.clone(), columns: vec![] }
    }

    pub fn with_meta(mut self, k: &str, v: impl ToString) -> Self {
        self.meta.insert(k.into(), v.to_string());
        self
    }

    pub fn push_field(&mut self, f: &RadialField<f64>) -> Result<()> {
        if f.len() != self.r.len() {
            return Err(Error::GridMismatch);
        }
        self.columns.push(f.values.clone());
        Ok(())
    }

    pub fn write(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "# kind = {}", self.kind)?;
        writeln!(w, "# d = {}", self.key.d)?;
        writeln!(w, "# b = {:?}", self.b)?;
        writeln!(w, "# n_cells = {}", self.key.n_cells)?;
        writeln!(w, "# r_max = {:?}", self.key.r_max)?;
        writeln!(w, "# stretch = {}", self.key.stretch.descriptor())?;
        for (k, v) in &self.meta {
            writeln!(w, "# {k} = {v}")?;
        }
        let mut head = String::from("r");
        for c in 0..self.columns.len() {
            head.push_str(&format!(",re_{c},im_{c}"));
        }
        writeln!(w, "{head}")?;
        for (j, r) in self.r.iter().enumerate() {
            let mut line = format!("{r:?}");
            for col in &self.columns {
                line.push_str(&format!(",{:?},{:?}", col[j].re, col[j].im));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = vec![];
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| bad("empty input"))??;
        if first.trim() != MAGIC {
            return Err(bad(format!("missing magic line, found {first:?}")));
        }
        let mut head: BTreeMap<String, String> = BTreeMap::new();
        let mut ncols = None;
        for line in lines.by_ref() {
            let line = line?;
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.split_once('=').ok_or_else(|| bad(format!("malformed header line {line:?}")))?;
                head.insert(k.trim().into(), v.trim().into());
            } else {
                let cols: Vec<&str> = line.split(',').collect();
                if cols.first() != Some(&"r") || cols.len() % 2 != 1 {
                    return Err(bad(format!("malformed column line {line:?}")));
                }
                ncols = Some((cols.len() - 1) / 2);
                break;
            }
        }
        let ncols = ncols.ok_or_else(|| bad("no column line"))?;
        let mut take = |k: &str| head.remove(k).ok_or_else(|| bad(format!("missing header key {k}")));
        let kind = take("kind")?;
        let num = |k: &str, v: String| v.parse::<f64>().map_err(|_| bad(format!("header {k} = {v:?} is not a number")));
        let d = take("d")?.parse::<usize>().map_err(|_| bad("header d is not an integer"))?;
        let b = num("b", take("b")?)?;
        let n_cells = take("n_cells")?.parse::<usize>().map_err(|_| bad("header n_cells is not an integer"))?;
        let r_max = num("r_max", take("r_max")?)?;
        let st = take("stretch")?;
        let stretch = Stretch::parse(&st).ok_or_else(|| bad(format!("unknown stretch {st:?}")))?;
        let mut r = Vec::with_capacity(n_cells);
        let mut columns = vec![Vec::with_capacity(n_cells); ncols];
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| bad(format!("row {i}: unparsable number")))?;
            if vals.len() != 1 + 2 * ncols {
                return Err(bad(format!("row {i}: expected {} values, found {}", 1 + 2 * ncols, vals.len())));
            }
            r.push(vals[0]);
            for (c, col) in columns.iter_mut().enumerate() {
                col.push(C::new(vals[1 + 2 * c], vals[2 + 2 * c]));
            }
        }
        if r.len() != n_cells {
            return Err(bad(format!("expected {n_cells} rows, found {}", r.len())));
        }
        Ok(Container { kind, key: GridKey { d, n_cells, r_max, stretch }, b, meta: head, r, columns })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        // write then rename so readers never see a partial file
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_text())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Container::read(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    pub fn meta_f64(&self, k: &str) -> Result<f64> {
        let v = self.meta.get(k).ok_or_else(|| bad(format!("missing header key {k}")))?;
        v.parse().map_err(|_| bad(format!("header {k} = {v:?} is not a number")))
    }

    /// Rebuilds the grid described by the header and checks the stored abscissae against it.
    pub fn grid(&self) -> Result<Arc<RadialGrid<f64>>> {
        let g = RadialGrid::new(self.key.d, self.key.n_cells, self.key.r_max, self.key.stretch)?;
        if g.r.iter().zip(&self.r).any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0)) {
            return Err(bad("stored radii do not match the header grid"));
        }
        Ok(Arc::new(g))
    }

    pub fn field(&self, grid: &Arc<RadialGrid<f64>>, col: usize) -> Result<RadialField<f64>> {
        if grid.key() != self.key {
            return Err(Error::GridMismatch);
        }
        let v = self.columns.get(col).ok_or_else(|| bad(format!("no column {col}")))?;
        RadialField::from_complex(grid, v.clone())
    }
}

pub fn field_container(f: &RadialField<f64>, b: f64) -> Container {
    let mut c = Container::new("field", &f.grid, b);
    c.push_field(f).expect("same grid");
    c
}

pub fn eigen_container(gs: &GroundState<f64>, e: &EigenBundle) -> Container {
    let mut c = Container::new("eigen", &gs.grid, gs.params.b)
        .with_meta("e0", format!("{:?}", e.e0))
        .with_meta("residual_plus", format!("{:?}", e.residual_plus))
        .with_meta("residual_cross", format!("{:?}", e.residual_cross))
        .with_meta("sign_convention_ok", e.sign_convention_ok)
        .with_meta("e0_unrefined", format!("{:?}", e.e0_unrefined))
        .with_meta("residual_unrefined", format!("{:?}", e.residual_unrefined))
        .with_meta("negative_count", e.negative_count)
        .with_meta("clamped", e.clamped);
    c.push_field(&e.y).expect("same grid");
    c
}

pub fn eigen_from_container(c: &Container, gs: &GroundState<f64>) -> Result<EigenBundle> {
    if c.kind != "eigen" {
        return Err(bad(format!("expected kind eigen, found {}", c.kind)));
    }
    if c.b != gs.params.b {
        return Err(bad(format!("b = {} does not match {}", c.b, gs.params.b)));
    }
    let int = |k: &str| c.meta_f64(k).map(|x| x as usize);
    Ok(EigenBundle {
        e0: c.meta_f64("e0")?,
        y: c.field(&gs.grid, 0)?,
        residual_plus: c.meta_f64("residual_plus")?,
        residual_cross: c.meta_f64("residual_cross")?,
        sign_convention_ok: c.meta.get("sign_convention_ok").map(|s| s == "true").unwrap_or(false),
        e0_unrefined: c.meta_f64("e0_unrefined")?,
        residual_unrefined: c.meta_f64("residual_unrefined")?,
        negative_count: int("negative_count")?,
        clamped: int("clamped")?,
    })
}

pub fn family_container(gs: &GroundState<f64>, fam: &ApproxFamily) -> Container {
    let res: Vec<String> = fam.fit_residuals.iter().map(|x| format!("{x:?}")).collect();
    let mut c = Container::new("family", &gs.grid, gs.params.b)
        .with_meta("a", format!("{:?}", fam.a))
        .with_meta("e0", format!("{:?}", fam.e0))
        .with_meta("q_radius", format!("{:?}", fam.q_radius))
        .with_meta("order", fam.order())
        .with_meta("grid_key", gs.grid.key().tag())
        .with_meta("fit_residuals", res.join(" "));
    for p in &fam.phi {
        c.push_field(p).expect("same grid");
    }
    c
}

pub fn family_from_container(c: &Container, gs: &GroundState<f64>) -> Result<ApproxFamily> {
    if c.kind != "family" {
        return Err(bad(format!("expected kind family, found {}", c.kind)));
    }
    let fit_residuals = match c.meta.get("fit_residuals") {
        Some(s) if !s.is_empty() => {
            s.split_whitespace().map(|x| x.parse::<f64>().map_err(|_| bad("fit_residuals"))).collect::<Result<Vec<_>>>()?
        }
        _ => vec![],
    };
    Ok(ApproxFamily {
        a: c.meta_f64("a")?,
        e0: c.meta_f64("e0")?,
        phi: (0..c.columns.len()).map(|k| c.field(&gs.grid, k)).collect::<Result<Vec<_>>>()?,
        q_radius: c.meta_f64("q_radius")?,
        fit_residuals,
    })
}

/// On-disk cache of eigenpairs keyed by `(d, b, n_cells, r_max, stretch)`.
#[derive(Clone, Debug)]
pub struct EigenCache {
    pub dir: PathBuf,
}

impl EigenCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        EigenCache { dir: dir.into() }
    }

    pub fn path(&self, gs: &GroundState<f64>) -> PathBuf {
        self.dir.join(format!("eigen_{}_b{:?}.csv", gs.grid.key().tag().replace(':', "-"), gs.params.b))
    }

    /// Returns the cached eigenpair or computes and stores it; the flag tells whether it was cached.
    pub fn load_or_compute(&self, gs: &GroundState<f64>, opts: &EigenOptions) -> Result<(EigenBundle, bool)> {
        let p = self.path(gs);
        if p.exists() {
            if let Ok(e) = Container::load(&p).and_then(|c| eigen_from_container(&c, gs)) {
                return Ok((e, true));
            }
        }
        let e = compute_eigen(gs, opts)?;
        std::fs::create_dir_all(&self.dir)?;
        eigen_container(gs, &e).save(&p)?;
        Ok((e, false))
    }
}
