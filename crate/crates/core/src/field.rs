//! Sampled fields on a [`GridSpec`] and their CSV form.
//!
//! CSV layout: a header `# schema=1 n_dims=<n> L=<L> N=<N>`, then the samples
//! in row-major order. A 2-D field has `N` lines of `N` comma-separated values;
//! a 1-D field has one value per line. Numbers use the shortest representation
//! that round-trips.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;

pub const SCHEMA_VERSION: u32 = 1;

/// Shortest string that parses back to `v`; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(domain(
                "RealField",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(
                "RealField",
                format!("non-finite sample at index {i}"),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node; `f` receives `[x1, x2]` (`x2 = 0` in 1-D).
    pub fn from_fn<F: Fn([f64; 2]) -> f64>(grid: GridSpec, f: F) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| c * v).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(domain("RealField", "fields live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let g = &self.grid;
        writeln!(
            w,
            "# schema={SCHEMA_VERSION} n_dims={} L={} N={}",
            g.n_dims(),
            g.half_width(),
            g.points()
        )?;
        let width = if g.n_dims() == 1 { 1 } else { g.points() };
        let mut line = String::new();
        for row in self.values.chunks(width) {
            line.clear();
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    line.push(',');
                }
                line.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let grid = parse_header(&header?)?;
        let mut values = Vec::with_capacity(grid.len());
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            for tok in line.split(',') {
                let v: f64 = tok
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad number {:?}", tok.trim())))?;
                if !v.is_finite() {
                    return Err(parse_err(lineno, "non-finite sample"));
                }
                values.push(v);
            }
            let width = if grid.n_dims() == 1 { 1 } else { grid.points() };
            if values.len() % width != 0 {
                return Err(parse_err(
                    lineno,
                    format!("expected {width} values per row"),
                ));
            }
        }
        if values.len() != grid.len() {
            return Err(parse_err(
                0,
                format!("expected {} samples, found {}", grid.len(), values.len()),
            ));
        }
        Ok(Self::from_raw(grid, values))
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(header: &str) -> Result<GridSpec> {
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing '#' header"))?;
    let (mut schema, mut dims, mut l, mut n) = (None, None, None, None);
    for kv in body.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("malformed header field {kv:?}")))?;
        let bad = || parse_err(1, format!("bad value for {k}: {v:?}"));
        match k {
            "schema" => schema = Some(v.parse::<u32>().map_err(|_| bad())?),
            "n_dims" => dims = Some(v.parse::<usize>().map_err(|_| bad())?),
            "L" => l = Some(v.parse::<f64>().map_err(|_| bad())?),
            "N" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            _ => return Err(parse_err(1, format!("unknown header field {k:?}"))),
        }
    }
    if schema != Some(SCHEMA_VERSION) {
        return Err(parse_err(1, format!("unsupported schema {schema:?}")));
    }
    match (dims, l, n) {
        (Some(d), Some(l), Some(n)) => {
            GridSpec::new(d, l, n).map_err(|e| parse_err(1, e.to_string()))
        }
        _ => Err(parse_err(1, "header needs n_dims, L and N")),
    }
}

/// Approximate continuous transform values at the frequency nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(domain(
                "SpectralField",
                format!("expected {} coefficients, got {}", grid.len(), coeffs.len()),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(domain("SpectralField", "non-finite coefficient"));
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_raw(grid: GridSpec, coeffs: Vec<Complex64>) -> Self {
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn csv_roundtrip_is_exact() {
        for dims in [1, 2] {
            let g = make_grid(dims, 3.0, 8).unwrap();
            let f = RealField::from_fn(g, |x| (x[0] * 1.3).sin() + x[1] / 3.0).unwrap();
            let mut buf = Vec::new();
            f.write_csv(&mut buf).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            assert!(text.starts_with(&format!("# schema=1 n_dims={dims} L=3 N=8\n")));
            let back = RealField::read_csv(buf.as_slice()).unwrap();
            assert_eq!(back, f);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# schema=1 n_dims=1 L=1 N=8\n0\n1\nx\n";
        match RealField::read_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(RealField::read_csv("# schema=2 n_dims=1 L=1 N=8\n".as_bytes()).is_err());
        assert!(RealField::read_csv("# schema=1 n_dims=1 L=1 N=8\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_wrong_shapes_and_nan() {
        let g = make_grid(1, 1.0, 8).unwrap();
        assert!(RealField::new(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(RealField::new(g, v).is_err());
        let h = make_grid(1, 2.0, 8).unwrap();
        assert!(RealField::zeros(g).add(&RealField::zeros(h)).is_err());
    }

    #[test]
    fn number_format_examples() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(-0.0), "-0");
        assert_eq!(fmt_f64(3e-40), "3e-40");
        assert_eq!(fmt_f64(2.5e20), "2.5e20");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.3333333333333333");
    }

    proptest::proptest! {
        #[test]
        fn number_format_round_trips(bits in proptest::prelude::any::<u64>()) {
            let v = f64::from_bits(bits);
            proptest::prop_assume!(v.is_finite());
            let back: f64 = fmt_f64(v).parse().unwrap();
            proptest::prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
