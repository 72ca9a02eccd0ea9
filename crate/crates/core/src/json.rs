//! JSON file formats for distributions and maps.
//!
//! ```text
//! map:          {"g": [[re, im], ...], "p": int}             g row-major, (p+1)² entries
//! distribution: {"p": int, "sigma": [[[re, im], ...], ...], "tau": [[re, im], ...]}
//! embedding:    {"dim": int, "dof": 2, "eta": [...], "w": [[...], ...]}
//! ```
//!
//! Writers emit keys in sorted order and every double with 17 significant
//! digits, so values survive a write/read cycle bit for bit.

use crate::cauchy::{ComplexCauchy, RealT2};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64};
use crate::mobius::MobiusMap;
use serde::Deserialize;

/// 17 significant digits in exponent form, e.g. `1.0000000000000000e0`.
pub fn fmt_f64(x: f64) -> String {
    assert!(x.is_finite(), "JSON cannot carry non-finite numbers");
    format!("{x:.16e}")
}

fn fmt_complex(z: C64) -> String {
    format!("[{},{}]", fmt_f64(z.re), fmt_f64(z.im))
}

fn fmt_list<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    let parts: Vec<String> = items.into_iter().map(f).collect();
    format!("[{}]", parts.join(","))
}

fn complex(pair: [f64; 2]) -> C64 {
    C64::new(pair[0], pair[1])
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    p: usize,
    g: Vec<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistFile {
    p: usize,
    tau: Vec<[f64; 2]>,
    sigma: Vec<Vec<[f64; 2]>>,
}

impl MobiusMap {
    pub fn to_json(&self) -> String {
        format!(r#"{{"g":{},"p":{}}}"#, fmt_list(self.matrix().as_slice().iter().copied(), fmt_complex), self.p())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: MapFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = f.p + 1;
        if f.p == 0 || f.g.len() != n * n {
            return Err(Error::Parse(format!("map with p = {} needs {} entries, got {}", f.p, n * n, f.g.len())));
        }
        let g = CMat::new(n, n, f.g.into_iter().map(complex).collect())?;
        Self::new(g)
    }
}

impl ComplexCauchy {
    pub fn to_json(&self) -> String {
        let sigma = self.sigma().matrix();
        let rows = fmt_list(0..self.p(), |i| fmt_list(sigma.row(i).iter().copied(), fmt_complex));
        format!(
            r#"{{"p":{},"sigma":{},"tau":{}}}"#,
            self.p(),
            rows,
            fmt_list(self.tau().iter().copied(), fmt_complex)
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: DistFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if f.p == 0 || f.tau.len() != f.p || f.sigma.len() != f.p || f.sigma.iter().any(|r| r.len() != f.p) {
            return Err(Error::Parse(format!("distribution with p = {} has mismatched tau/sigma shapes", f.p)));
        }
        let sigma = CMat::from_rows(&f.sigma.into_iter().map(|r| r.into_iter().map(complex).collect()).collect::<Vec<_>>())?;
        Self::new(f.tau.into_iter().map(complex).collect(), sigma)
    }
}

impl RealT2 {
    pub fn to_json(&self) -> String {
        let n = self.dim();
        let w = fmt_list(0..n, |i| fmt_list(self.w()[i * n..(i + 1) * n].iter().copied(), fmt_f64));
        format!(
            r#"{{"dim":{},"dof":2,"eta":{},"w":{}}}"#,
            n,
            fmt_list(self.eta().iter().copied(), fmt_f64),
            w
        )
    }
}
