use std::collections::BTreeMap;
use std::path::Path;

use num_complex::{Complex, Complex64};

use super::{Expr, GridDomain};
use crate::error::{input, Error, Result};
use crate::schatten::SchattenIndex;
use crate::Real;

/// A complex potential sampled at the interior nodes of a [`GridDomain`].
#[derive(Clone, Debug)]
pub struct Potential<T: Real> {
    domain: GridDomain<T>,
    samples: Vec<Complex<T>>,
    l2_norm: T,
}

impl<T: Real> Potential<T> {
    pub fn from_samples(domain: &GridDomain<T>, samples: Vec<Complex<T>>) -> Result<Self> {
        if samples.len() != domain.num_nodes() {
            return input(format!("potential has {} samples, grid has {} nodes", samples.len(), domain.num_nodes()));
        }
        if !samples.iter().all(|z| z.re.finite() && z.im.finite()) {
            return input("potential has non-finite samples");
        }
        let l2_norm = (domain.cell_volume() * samples.iter().fold(T::zero(), |a, z| a + z.norm_sqr())).sqrt();
        Ok(Self { domain: domain.clone(), samples, l2_norm })
    }

    pub fn from_fn(domain: &GridDomain<T>, f: impl Fn(T, T) -> Complex<T>) -> Result<Self> {
        let s = (0..domain.num_nodes())
            .map(|i| {
                let c = domain.coords(i);
                f(c[0], c[1])
            })
            .collect();
        Self::from_samples(domain, s)
    }

    pub fn from_expr(domain: &GridDomain<T>, e: &Expr) -> Result<Self> {
        Self::from_fn(domain, |x, y| {
            let z = e.eval(x.f64(), y.f64());
            Complex::new(T::of(z.re), T::of(z.im))
        })
    }

    pub fn zero(domain: &GridDomain<T>) -> Self {
        Self { domain: domain.clone(), samples: vec![Complex::new(T::zero(), T::zero()); domain.num_nodes()], l2_norm: T::zero() }
    }

    pub fn domain(&self) -> &GridDomain<T> {
        &self.domain
    }

    pub fn samples(&self) -> &[Complex<T>] {
        &self.samples
    }

    /// `||V||_{L^2}` with the cell-volume weight.
    pub fn l2_norm(&self) -> T {
        self.l2_norm
    }

    /// `c V`.
    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self::from_samples(&self.domain, self.samples.iter().map(|z| *z * c).collect()).expect("finite scaling")
    }

    /// `V + c`.
    pub fn shifted(&self, c: Complex<T>) -> Self {
        Self::from_samples(&self.domain, self.samples.iter().map(|z| *z + c).collect()).expect("finite shift")
    }

    /// `||(1 + |x|^2)^{delta/2} V||_{L^2}`.
    pub fn delta_norm(&self, delta: T) -> T {
        let s = self.samples.iter().enumerate().fold(T::zero(), |acc, (i, z)| {
            let c = self.domain.coords(i);
            let w = (T::one() + c[0] * c[0] + c[1] * c[1]).powf(delta);
            acc + w * z.norm_sqr()
        });
        (self.domain.cell_volume() * s).sqrt()
    }

    /// Squared `L^2` norm on each unit lattice cube `beta + [-1/2, 1/2)^d`
    /// scaled by `cube_size`, keyed by the lattice point.
    fn cube_masses(&self, cube_size: T) -> BTreeMap<[i64; 2], T> {
        let mut m = BTreeMap::new();
        let d = self.domain.dim();
        for (i, z) in self.samples.iter().enumerate() {
            let c = self.domain.coords(i);
            let mut key = [0i64; 2];
            for a in 0..d {
                key[a] = (c[a] / cube_size + T::of(0.5)).floor().f64() as i64;
            }
            *m.entry(key).or_insert_with(T::zero) += z.norm_sqr();
        }
        let w = self.domain.cell_volume();
        m.values_mut().for_each(|v| *v *= w);
        m
    }

    pub fn bs_norms(&self, ps: &[SchattenIndex<T>]) -> Result<Vec<(SchattenIndex<T>, T)>> {
        ps.iter().map(|&p| Ok((p, birman_solomjak_norm(self, p, T::one())?))).collect()
    }
}

/// `(sum_beta ||chi_beta V||_{L^2}^p)^{1/p}` over lattice cubes of side
/// `cube_size`; cubes outside the grid contribute zero.
pub fn birman_solomjak_norm<T: Real>(v: &Potential<T>, p: SchattenIndex<T>, cube_size: T) -> Result<T> {
    let pv = match p {
        SchattenIndex::Finite(x) if x >= T::one() && x <= T::of(2.0) => x,
        _ => return input(format!("Birman-Solomjak exponent must lie in [1, 2], got {p}")),
    };
    if !cube_size.finite() || cube_size <= T::zero() {
        return input("cube size must be positive");
    }
    let s = v
        .cube_masses(cube_size)
        .values()
        .fold(T::zero(), |acc, m2| acc + m2.sqrt().powf(pv));
    Ok(s.powf(T::one() / pv))
}

/// One-dimensional potential from CSV rows `coordinate, Re V, Im V`
/// (`Im V` optional), linearly interpolated onto the grid and zero outside
/// the tabulated range. A non-numeric first row is treated as a header;
/// lines starting with `#` are ignored.
pub fn load_potential_csv<T: Real>(domain: &GridDomain<T>, path: &Path) -> Result<Potential<T>> {
    if domain.dim() != 1 {
        return input("CSV potentials are supported on one-dimensional grids only");
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Io(std::io::Error::other(format!("{}: {e}", path.display()))))?;
    let mut rows: Vec<(f64, Complex64)> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let field = |i: usize| rec.get(i).map(|s| s.parse::<f64>());
        match (field(0), field(1)) {
            (Some(Ok(x)), Some(Ok(re))) => {
                let im = match field(2) {
                    Some(Ok(v)) => v,
                    None => 0.0,
                    Some(Err(_)) => return Err(Error::Parse(format!("{}: row {}: bad imaginary part", path.display(), k + 1))),
                };
                if !(x.is_finite() && re.is_finite() && im.is_finite()) {
                    return Err(Error::Parse(format!("{}: row {}: non-finite value", path.display(), k + 1)));
                }
                rows.push((x, Complex64::new(re, im)));
            }
            _ if k == 0 => continue,
            _ => return Err(Error::Parse(format!("{}: row {}: expected 'x, re[, im]'", path.display(), k + 1))),
        }
    }
    if rows.len() < 2 {
        return Err(Error::Parse(format!("{}: need at least two rows", path.display())));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    if rows.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Parse(format!("{}: repeated coordinate", path.display())));
    }
    Potential::from_fn(domain, |x, _| {
        let x = x.f64();
        let v = if x < rows[0].0 || x > rows[rows.len() - 1].0 {
            Complex64::new(0.0, 0.0)
        } else {
            let k = rows.partition_point(|r| r.0 <= x).clamp(1, rows.len() - 1);
            let (x0, v0) = rows[k - 1];
            let (x1, v1) = rows[k];
            let s = (x - x0) / (x1 - x0);
            v0 * (1.0 - s) + v1 * s
        };
        Complex::new(T::of(v.re), T::of(v.im))
    })
}

/// Closed-form bound `2^{d/p} sqrt(pi/p) (1 + t^{-1/2})^{d/p}` on
/// `||e^{-t|x|^2}||_{2;p}`.
pub fn gaussian_bs_bound<T: Real>(t: T, p: T, d: usize) -> T {
    let dp = T::of_usize(d) / p;
    T::of(2.0).powf(dp) * (T::pi() / p).sqrt() * (T::one() + T::one() / t.sqrt()).powf(dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_of_unit_cube() {
        // h = 1/16 so that [-1/2, 1/2) holds exactly 16 nodes.
        let dom = GridDomain::<f64>::truncated_box(4.0, 1, 127).unwrap();
        let v = Potential::from_fn(&dom, |x, _| Complex::new(if (-0.5..0.5).contains(&x) { 1.0 } else { 0.0 }, 0.0)).unwrap();
        for p in [1.0, 1.5, 2.0] {
            let n = birman_solomjak_norm(&v, SchattenIndex::Finite(p), 1.0).unwrap();
            assert!((n - 1.0).abs() < 1e-14, "p={p}: {n}");
        }
    }

    #[test]
    fn exponent_range_enforced() {
        let dom = GridDomain::<f64>::truncated_box(4.0, 1, 31).unwrap();
        let v = Potential::zero(&dom);
        assert!(birman_solomjak_norm(&v, SchattenIndex::Finite(2.5), 1.0).is_err());
        assert!(birman_solomjak_norm(&v, SchattenIndex::Infinity, 1.0).is_err());
    }
}
