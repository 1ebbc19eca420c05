//! Axis-aligned boxes of the regressor space and the midpoint split rule.

/// Half-open box `lower_i <= x_i < upper_i`. Faces lying on the global upper
/// boundary are closed so that the leaves of a tree cover `[-A, A]^p` exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    upper_closed: Vec<bool>,
}

impl Region {
    /// The root box `[-bound, bound]^p`.
    pub fn root(p: usize, bound: f64) -> Self {
        Self {
            lower: vec![-bound; p],
            upper: vec![bound; p],
            upper_closed: vec![true; p],
        }
    }

    pub(crate) fn from_parts(lower: Vec<f64>, upper: Vec<f64>, upper_closed: Vec<bool>) -> Self {
        Self {
            lower,
            upper,
            upper_closed,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn upper_closed(&self) -> &[bool] {
        &self.upper_closed
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &v)| {
            v >= self.lower[i] && (v < self.upper[i] || (self.upper_closed[i] && v == self.upper[i]))
        })
    }

    pub fn midpoint(&self, dim: usize) -> f64 {
        0.5 * (self.lower[dim] + self.upper[dim])
    }
}

/// Split dimension for a node at `depth` (zero-based): dimensions are cycled.
pub fn split_dimension(depth: usize, p: usize) -> usize {
    depth % p
}

/// Selects how a region is cut in two. Only the midpoint rule exists; the enum
/// is the extension point for data-dependent separators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
#[non_exhaustive]
pub enum SplitRule {
    #[default]
    Midpoint,
}

/// Cuts `region` at the midpoint of dimension `depth mod p`. Returns
/// `(lower child, upper child)`; points with `x_i >= c` belong to the upper one.
pub fn split_region(region: &Region, depth: usize) -> (Region, Region) {
    let dim = split_dimension(depth, region.dim());
    let c = region.midpoint(dim);

    let mut lo = region.clone();
    lo.upper[dim] = c;
    lo.upper_closed[dim] = false;

    let mut hi = region.clone();
    hi.lower[dim] = c;
    (lo, hi)
}

/// Which side of the split plane of a node at `depth` the point falls on.
pub(crate) fn goes_upper(region: &Region, depth: usize, x: &[f64]) -> bool {
    let dim = split_dimension(depth, region.dim());
    x[dim] >= region.midpoint(dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_splits() {
        let a = 1.0;
        let root = Region::root(1, a);
        let (r0, r1) = split_region(&root, 0);
        assert_eq!((r0.lower[0], r0.upper[0]), (-a, 0.0));
        assert_eq!((r1.lower[0], r1.upper[0]), (0.0, a));
        let (r00, r01) = split_region(&r0, 1);
        assert_eq!((r00.lower[0], r00.upper[0]), (-a, -a / 2.0));
        assert_eq!((r01.lower[0], r01.upper[0]), (-a / 2.0, 0.0));
    }

    #[test]
    fn dimensions_cycle() {
        let root = Region::root(2, 1.0);
        let (lo, hi) = split_region(&root, 0);
        assert_eq!(lo.upper, vec![0.0, 1.0]);
        assert_eq!(hi.lower, vec![0.0, -1.0]);
        let (lo2, hi2) = split_region(&hi, 1);
        assert_eq!(lo2.lower, vec![0.0, -1.0]);
        assert_eq!(lo2.upper, vec![1.0, 0.0]);
        assert_eq!(hi2.lower, vec![0.0, 0.0]);
        assert_eq!(split_dimension(2, 2), 0);
    }

    #[test]
    fn boundary_membership() {
        let root = Region::root(1, 1.0);
        let (lo, hi) = split_region(&root, 0);
        // The plane itself belongs to the upper child.
        assert!(!lo.contains(&[0.0]));
        assert!(hi.contains(&[0.0]));
        // The global upper face is closed, the lower face too.
        assert!(hi.contains(&[1.0]));
        assert!(lo.contains(&[-1.0]));
        assert!(!hi.contains(&[1.0 + 1e-12]));
    }
}
