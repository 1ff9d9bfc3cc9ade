//! Periodic Cartesian lattices and the fields living on them.
//!
//! Both field types store one contiguous plane per component over the
//! lattice sites (row-major, `x` fastest), so that transport of a velocity
//! block is a whole-plane rotation.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform periodic lattice in one or two dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice<T> {
    dim: usize,
    extent: [usize; 2],
    dx: T,
}

impl<T: Real> Lattice<T> {
    pub fn new_1d(n: usize, dx: T) -> Result<Self> {
        Self::new(&[n], dx)
    }

    pub fn new_2d(nx: usize, ny: usize, dx: T) -> Result<Self> {
        Self::new(&[nx, ny], dx)
    }

    pub fn new(extent: &[usize], dx: T) -> Result<Self> {
        if extent.is_empty() || extent.len() > 2 {
            return Err(Error::Config(format!("lattice dimension must be 1 or 2, got {}", extent.len())));
        }
        if extent.iter().any(|&n| n < 2) {
            return Err(Error::Config(format!("every axis needs at least 2 sites, got {extent:?}")));
        }
        if !(dx > T::zero()) || !dx.is_finite() {
            return Err(Error::Config(format!("spacing must be positive, got {dx}")));
        }
        let mut e = [1, 1];
        e[..extent.len()].copy_from_slice(extent);
        Ok(Self { dim: extent.len(), extent: e, dx })
    }

    /// Unit-length periodic domain `[0, 1)^d` with `n` sites per axis.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        let dx = T::one() / T::count(n);
        match dim {
            1 => Self::new_1d(n, dx),
            2 => Self::new_2d(n, n, dx),
            _ => Err(Error::Config(format!("unsupported dimension {dim}"))),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn extent(&self) -> &[usize] {
        &self.extent[..self.dim]
    }

    #[inline]
    pub fn dx(&self) -> T {
        self.dx
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.extent[0] * self.extent[1]
    }

    /// Measure of one cell, `dx^d`.
    pub fn cell_volume(&self) -> T {
        self.dx.powi(self.dim as i32)
    }

    /// Coordinates `(k_x dx, k_y dx)` of a site; the second entry is zero in 1D.
    pub fn coordinates(&self, site: usize) -> [T; 2] {
        let nx = self.extent[0];
        [T::count(site % nx) * self.dx, T::count(site / nx) * self.dx]
    }

    pub fn site_index(&self, ix: usize, iy: usize) -> usize {
        iy * self.extent[0] + ix
    }

    fn same_as(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.extent == other.extent
            && (self.dx - other.dx).abs() <= T::epsilon() * T::lit(16.0) * self.dx
    }
}

/// Cyclically translate one lattice plane by a per-axis offset.
///
/// The value at site `x` moves to `x + offset`. Offsets must satisfy
/// `|offset_j| < N_j`.
pub fn shift_plane<T: Copy>(plane: &mut [T], extent: [usize; 2], offset: [i64; 2]) -> Result<()> {
    for axis in 0..2 {
        if offset[axis].unsigned_abs() as usize >= extent[axis] && offset[axis] != 0 {
            return Err(Error::ShiftTooLarge { axis, offset: offset[axis], extent: extent[axis] });
        }
    }
    let [nx, ny] = extent;
    debug_assert_eq!(plane.len(), nx * ny);
    let rx = offset[0].rem_euclid(nx as i64) as usize;
    if rx != 0 {
        for row in plane.chunks_exact_mut(nx) {
            row.rotate_right(rx);
        }
    }
    let ry = offset[1].rem_euclid(ny as i64) as usize;
    if ry != 0 {
        plane.rotate_right(ry * nx);
    }
    Ok(())
}

/// `M` conserved components per site.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField<T> {
    lattice: Lattice<T>,
    components: usize,
    data: Vec<T>,
}

impl<T: Real> ConservedField<T> {
    pub fn zeros(lattice: Lattice<T>, components: usize) -> Self {
        assert!(components >= 1, "a conserved field needs at least one component");
        Self { lattice, components, data: vec![T::zero(); components * lattice.n_sites()] }
    }

    /// Point-wise sampling of `init(x, out)` at every site.
    pub fn from_fn<F>(lattice: Lattice<T>, components: usize, mut init: F) -> Self
    where
        F: FnMut([T; 2], &mut [T]),
    {
        let mut field = Self::zeros(lattice, components);
        let mut buf = vec![T::zero(); components];
        for site in 0..lattice.n_sites() {
            init(lattice.coordinates(site), &mut buf);
            field.set_site(site, &buf);
        }
        field
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    #[inline]
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn component(&self, c: usize) -> &[T] {
        let n = self.lattice.n_sites();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [T] {
        let n = self.lattice.n_sites();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn site(&self, site: usize, out: &mut [T]) {
        let n = self.lattice.n_sites();
        for (c, o) in out.iter_mut().enumerate().take(self.components) {
            *o = self.data[c * n + site];
        }
    }

    pub fn set_site(&mut self, site: usize, values: &[T]) {
        let n = self.lattice.n_sites();
        for (c, &v) in values.iter().enumerate().take(self.components) {
            self.data[c * n + site] = v;
        }
    }

    /// Site-wise derived field, e.g. velocity from `(h, hu)`.
    pub fn map_sites<F>(&self, components: usize, mut f: F) -> Self
    where
        F: FnMut(&[T], &mut [T]),
    {
        let mut out = Self::zeros(self.lattice, components);
        let mut src = vec![T::zero(); self.components];
        let mut dst = vec![T::zero(); components];
        for site in 0..self.lattice.n_sites() {
            self.site(site, &mut src);
            f(&src, &mut dst);
            out.set_site(site, &dst);
        }
        out
    }

    /// Sum over sites of one component.
    pub fn total(&self, c: usize) -> T {
        self.component(c).iter().copied().sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// `q` distribution functions of `M` components each.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField<T> {
    lattice: Lattice<T>,
    velocities: usize,
    components: usize,
    data: Vec<T>,
}

impl<T: Real> DistributionField<T> {
    pub fn zeros(lattice: Lattice<T>, velocities: usize, components: usize) -> Self {
        assert!(velocities >= 1 && components >= 1);
        Self { lattice, velocities, components, data: vec![T::zero(); velocities * components * lattice.n_sites()] }
    }

    #[inline]
    pub fn lattice(&self) -> &Lattice<T> {
        &self.lattice
    }

    #[inline]
    pub fn velocities(&self) -> usize {
        self.velocities
    }

    #[inline]
    pub fn components(&self) -> usize {
        self.components
    }

    #[inline]
    fn plane_index(&self, k: usize, c: usize) -> usize {
        k * self.components + c
    }

    pub fn plane(&self, k: usize, c: usize) -> &[T] {
        let n = self.lattice.n_sites();
        let p = self.plane_index(k, c);
        &self.data[p * n..(p + 1) * n]
    }

    pub fn plane_mut(&mut self, k: usize, c: usize) -> &mut [T] {
        let n = self.lattice.n_sites();
        let p = self.plane_index(k, c);
        &mut self.data[p * n..(p + 1) * n]
    }

    /// Gather the `q * M` values of one site, laid out as `[k * M + c]`.
    #[inline]
    pub fn site(&self, site: usize, out: &mut [T]) {
        let n = self.lattice.n_sites();
        for (p, o) in out.iter_mut().enumerate().take(self.velocities * self.components) {
            *o = self.data[p * n + site];
        }
    }

    #[inline]
    pub fn set_site(&mut self, site: usize, values: &[T]) {
        let n = self.lattice.n_sites();
        for (p, &v) in values.iter().enumerate().take(self.velocities * self.components) {
            self.data[p * n + site] = v;
        }
    }

    /// Translate every component of velocity block `k` by `cells`.
    pub fn shift(&mut self, k: usize, cells: [i64; 2]) -> Result<()> {
        if k >= self.velocities {
            return Err(Error::Config(format!("velocity index {k} out of range (q = {})", self.velocities)));
        }
        if self.lattice.dim() == 1 && cells[1] != 0 {
            return Err(Error::Config("non-zero y offset on a 1D lattice".into()));
        }
        let extent = self.lattice.extent;
        for c in 0..self.components {
            shift_plane(self.plane_mut(k, c), extent, cells)?;
        }
        Ok(())
    }

    /// `u = sum_k f_k` at every site.
    pub fn moments(&self) -> ConservedField<T> {
        let mut u = ConservedField::zeros(self.lattice, self.components);
        for k in 0..self.velocities {
            for c in 0..self.components {
                let src = self.plane(k, c);
                for (dst, &v) in u.component_mut(c).iter_mut().zip(src) {
                    *dst += v;
                }
            }
        }
        u
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// `sqrt( sum_sites dx^d |num - exact|^2 )` for one component.
pub fn l2_error<T: Real>(num: &ConservedField<T>, exact: &[T], component: usize) -> Result<T> {
    let n = num.lattice().n_sites();
    if exact.len() != n {
        return Err(Error::LatticeMismatch(format!("reference has {} values for {} sites", exact.len(), n)));
    }
    if component >= num.components() {
        return Err(Error::Config(format!("component {component} out of range")));
    }
    let sum: T = num.component(component).iter().zip(exact).map(|(&a, &b)| (a - b) * (a - b)).sum();
    Ok((num.lattice().cell_volume() * sum).sqrt())
}

/// Self-convergence estimator between a run and its refinement by two.
///
/// Coarse site `k` is compared with fine site `2k` on every axis; the sum is
/// weighted by the coarse cell volume.
pub fn self_convergence_error<T: Real>(
    coarse: &ConservedField<T>,
    fine: &ConservedField<T>,
    component: usize,
) -> Result<T> {
    let lc = coarse.lattice();
    let lf = fine.lattice();
    let nested = lc.dim() == lf.dim()
        && lc.extent().iter().zip(lf.extent()).all(|(&c, &f)| f == 2 * c)
        && (lc.dx() - T::lit(2.0) * lf.dx()).abs() <= T::lit(1e-12) * lc.dx();
    if !nested {
        return Err(Error::LatticeMismatch(format!(
            "fine lattice {:?} is not a refinement by two of {:?}",
            lf.extent(),
            lc.extent()
        )));
    }
    if component >= coarse.components() || component >= fine.components() {
        return Err(Error::Config(format!("component {component} out of range")));
    }
    let [ncx, ncy] = lc.extent;
    let c = coarse.component(component);
    let f = fine.component(component);
    let mut sum = T::zero();
    for iy in 0..ncy {
        let fy = if lc.dim() == 2 { 2 * iy } else { 0 };
        for ix in 0..ncx {
            let d = c[lc.site_index(ix, iy)] - f[lf.site_index(2 * ix, fy)];
            sum += d * d;
        }
    }
    Ok((lc.cell_volume() * sum).sqrt())
}

/// Check that two fields live on the same lattice.
pub fn ensure_same_lattice<T: Real>(a: &Lattice<T>, b: &Lattice<T>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::LatticeMismatch(format!("{:?} vs {:?}", a.extent(), b.extent())))
    }
}
