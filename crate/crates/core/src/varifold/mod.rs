//! Discrete oriented varifolds: finite sums `Σ wᵢ δ_(xᵢ, vᵢ)` on ℝⁿ×Sⁿ⁻¹.

mod marginals;
mod transport;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use marginals::{DirectionalMeasure, Measure, Representation, SpatialMeasure, SupportMeasure};
pub use transport::{optimal_transport, w1_small, TransportSolution, W1_MAX_ATOMS};

use crate::mesh::{segment_geometry, triangle_geometry, PolylineGraph, TriMesh};
use crate::{Error, Result};

/// Allowed deviation of a direction from unit length.
pub const UNIT_TOL: f64 = 1e-9;

/// Parallel arrays of support positions, unit directions and positive
/// weights, stored flat with stride `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVarifold {
    n: usize,
    positions: Vec<f64>,
    directions: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteVarifold {
    /// Builds a varifold from flat coordinate arrays after validating every
    /// invariant.
    pub fn new(n: usize, positions: Vec<f64>, directions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidVarifold("ambient dimension must be positive".into()));
        }
        if weights.is_empty() {
            return Err(Error::EmptyVarifold);
        }
        let m = weights.len();
        if positions.len() != m * n || directions.len() != m * n {
            return Err(Error::InvalidVarifold(format!(
                "{m} weights need {} position and direction entries, got {} and {}",
                m * n,
                positions.len(),
                directions.len()
            )));
        }
        for i in 0..m {
            let (x, v, w) = (&positions[i * n..(i + 1) * n], &directions[i * n..(i + 1) * n], weights[i]);
            if x.iter().chain(v).any(|c| !c.is_finite()) || !w.is_finite() {
                return Err(Error::NonFiniteValue(i));
            }
            if w <= 0.0 {
                return Err(Error::InvalidVarifold(format!("weight {i} is not positive: {w}")));
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidVarifold(format!("direction {i} has norm {norm}")));
            }
        }
        Ok(Self {
            n,
            positions,
            directions,
            weights,
        })
    }

    /// One Dirac per non-degenerate face, in face order.
    pub fn from_mesh(mesh: &TriMesh) -> Result<Self> {
        let mut out = Self::with_capacity(3, mesh.num_faces());
        for f in 0..mesh.num_faces() {
            match triangle_geometry(mesh, f) {
                Ok(g) => out.push(&g.center, &g.normal, g.area),
                Err(Error::DegenerateFace(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.non_empty()
    }

    /// One Dirac per non-degenerate edge, in edge order.
    pub fn from_graph(graph: &PolylineGraph) -> Result<Self> {
        let mut out = Self::with_capacity(graph.dim(), graph.edges().len());
        for e in 0..graph.edges().len() {
            match segment_geometry(graph, e) {
                Ok(g) => out.push(&g.center, &g.tangent, g.length),
                Err(Error::DegenerateEdge(_)) => {}
                Err(e) => return Err(e),
            }
        }
        out.non_empty()
    }

    fn with_capacity(n: usize, m: usize) -> Self {
        Self {
            n,
            positions: Vec::with_capacity(m * n),
            directions: Vec::with_capacity(m * n),
            weights: Vec::with_capacity(m),
        }
    }

    fn push(&mut self, x: &[f64], v: &[f64], w: f64) {
        self.positions.extend_from_slice(x);
        self.directions.extend_from_slice(v);
        self.weights.push(w);
    }

    fn non_empty(self) -> Result<Self> {
        if self.weights.is_empty() {
            Err(Error::EmptyVarifold)
        } else {
            Ok(self)
        }
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.n..(i + 1) * self.n]
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.directions[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn positions_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn directions_flat(&self) -> &[f64] {
        &self.directions
    }

    /// `Σ wᵢ h(xᵢ, vᵢ)`, accumulated in support order.
    pub fn pair<F>(&self, mut h: F) -> Result<Vec<f64>>
    where
        F: FnMut(&[f64], &[f64]) -> Vec<f64>,
    {
        let mut acc: Vec<f64> = Vec::new();
        for i in 0..self.len() {
            let value = h(self.position(i), self.direction(i));
            if value.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteValue(i));
            }
            if i == 0 {
                acc = vec![0.0; value.len()];
            } else if value.len() != acc.len() {
                return Err(Error::ShapeMismatch(format!(
                    "test function returned {} values at support {i}, {} before",
                    value.len(),
                    acc.len()
                )));
            }
            for (a, c) in acc.iter_mut().zip(&value) {
                *a += self.weights[i] * c;
            }
        }
        Ok(acc)
    }

    /// Scalar-valued version of [`DiscreteVarifold::pair`].
    pub fn pair_scalar<F>(&self, mut h: F) -> Result<f64>
    where
        F: FnMut(&[f64], &[f64]) -> f64,
    {
        Ok(self.pair(|x, v| vec![h(x, v)])?[0])
    }

    /// Total variation norm, which for positive measures is `Σ wᵢ`.
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scale_weights(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidVarifold(format!("weight scale must be positive, got {factor}")));
        }
        let mut out = self.clone();
        for w in &mut out.weights {
            *w *= factor;
        }
        Ok(out)
    }

    /// Rescales the weights so the total mass equals `target`.
    pub fn normalize_mass(&self, target: f64) -> Result<Self> {
        let mass = self.total_mass();
        if !(mass > 0.0) {
            return Err(Error::EmptyVarifold);
        }
        self.scale_weights(target / mass)
    }

    /// Sum of two varifolds: the concatenated Dirac list.
    pub fn concat(&self, other: &DiscreteVarifold) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidVarifold(format!(
                "cannot add varifolds in dimensions {} and {}",
                self.n, other.n
            )));
        }
        let mut out = self.clone();
        out.positions.extend_from_slice(&other.positions);
        out.directions.extend_from_slice(&other.directions);
        out.weights.extend_from_slice(&other.weights);
        Ok(out)
    }

    /// Keeps the supports listed in `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut out = Self::with_capacity(self.n, indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidVarifold(format!("support {i} out of range")));
            }
            out.push(self.position(i), self.direction(i), self.weights[i]);
        }
        out.non_empty()
    }

    pub fn spatial_marginal(&self) -> SpatialMeasure {
        SpatialMeasure::from_parts(self.n, self.positions.clone(), self.weights.clone())
    }

    pub fn directional_marginal(&self) -> DirectionalMeasure {
        DirectionalMeasure::from_parts(self.n, self.directions.clone(), self.weights.clone())
    }

    fn atom_eq(&self, i: usize, other: &DiscreteVarifold, j: usize) -> bool {
        self.position(i) == other.position(j)
            && self.direction(i) == other.direction(j)
            && self.weights[i] == other.weights[j]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&VarifoldJson::from(self)).expect("plain numeric data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: VarifoldJson = serde_json::from_str(text)?;
        raw.try_into()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// `‖μ − ν‖_TV` when the Dirac list of `nu` is an ordered sub-list of the
/// list of `mu`, i.e. the total weight of the removed supports.
pub fn tv_difference_submeasure(mu: &DiscreteVarifold, nu: &DiscreteVarifold) -> Result<f64> {
    if mu.n != nu.n || nu.len() > mu.len() {
        return Err(Error::NotSubmeasure);
    }
    let mut removed = 0.0;
    let mut j = 0;
    for i in 0..mu.len() {
        if j < nu.len() && mu.atom_eq(i, nu, j) {
            j += 1;
        } else {
            removed += mu.weights[i];
        }
    }
    if j == nu.len() {
        Ok(removed)
    } else {
        Err(Error::NotSubmeasure)
    }
}

#[derive(Serialize, Deserialize)]
struct VarifoldJson {
    n: usize,
    positions: Vec<Vec<f64>>,
    directions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl From<&DiscreteVarifold> for VarifoldJson {
    fn from(mu: &DiscreteVarifold) -> Self {
        Self {
            n: mu.n,
            positions: mu.positions.chunks(mu.n).map(<[f64]>::to_vec).collect(),
            directions: mu.directions.chunks(mu.n).map(<[f64]>::to_vec).collect(),
            weights: mu.weights.clone(),
        }
    }
}

impl TryFrom<VarifoldJson> for DiscreteVarifold {
    type Error = Error;

    fn try_from(raw: VarifoldJson) -> Result<Self> {
        let rows_ok = |rows: &[Vec<f64>]| rows.iter().all(|r| r.len() == raw.n);
        if !rows_ok(&raw.positions) || !rows_ok(&raw.directions) {
            return Err(Error::Schema(format!("every support row must have {} entries", raw.n)));
        }
        DiscreteVarifold::new(
            raw.n,
            raw.positions.concat(),
            raw.directions.concat(),
            raw.weights,
        )
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::mesh::{generate_synthetic_shape, remove_faces, ShapeKind};

    fn cube() -> DiscreteVarifold {
        DiscreteVarifold::from_mesh(&crate::mesh::fixtures::unit_cube()).unwrap()
    }

    #[test]
    fn right_triangle_is_one_dirac() {
        let mu = DiscreteVarifold::from_mesh(&crate::mesh::fixtures::right_triangle()).unwrap();
        assert_eq!(mu.len(), 1);
        assert!(mu.position(0).iter().zip([1.0 / 3.0, 1.0 / 3.0, 0.0]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(mu.direction(0), &[0.0, 0.0, 1.0]);
        assert_eq!(mu.weight(0), 0.5);
    }

    #[test]
    fn cube_varifold() {
        let mu = cube();
        assert_eq!(mu.len(), 12);
        assert!((mu.total_mass() - 6.0).abs() < 1e-12);
        let degenerate = TriMesh::new(vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]], vec![[0, 1, 2]]).unwrap();
        assert!(matches!(DiscreteVarifold::from_mesh(&degenerate), Err(Error::EmptyVarifold)));
    }

    #[test]
    fn degenerate_faces_are_skipped() {
        let m = TriMesh::new(
            vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]],
            vec![[0, 1, 3], [0, 1, 2]],
        )
        .unwrap();
        let mu = DiscreteVarifold::from_mesh(&m).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.weight(0), 0.5);
    }

    #[test]
    fn graph_varifolds() {
        let seg = PolylineGraph::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0]], vec![[0, 1]]).unwrap();
        let mu = DiscreteVarifold::from_graph(&seg).unwrap();
        assert_eq!((mu.len(), mu.weight(0)), (1, 1.0));
        let moved = PolylineGraph::new(2, &[vec![5.0, 5.0], vec![5.0, 6.0]], vec![[0, 1]]).unwrap();
        let two = DiscreteVarifold::from_graph(&seg.union(&moved).unwrap()).unwrap();
        assert_eq!((two.len(), two.total_mass()), (2, 2.0));
        let square = PolylineGraph::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![[0, 1], [1, 2], [2, 3], [3, 0]],
        )
        .unwrap();
        assert_eq!(DiscreteVarifold::from_graph(&square).unwrap().total_mass(), 4.0);
        let point = PolylineGraph::new(3, &[vec![0.0; 3]], vec![[0, 0]]).unwrap();
        assert!(matches!(DiscreteVarifold::from_graph(&point), Err(Error::EmptyVarifold)));
    }

    #[test]
    fn pairing_basics() {
        let single = DiscreteVarifold::new(3, vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0], vec![2.0]).unwrap();
        assert_eq!(single.pair_scalar(|_, _| 3.0).unwrap(), 6.0);
        let mu = cube();
        assert_eq!(mu.pair_scalar(|_, _| 1.0).unwrap(), mu.total_mass());
        // Brute force over the explicit face centroids of the cube fixture.
        let mesh = crate::mesh::fixtures::unit_cube();
        let oracle: f64 = mesh
            .faces()
            .iter()
            .map(|f| 0.5 * f.iter().map(|&i| mesh.vertices()[i][2]).sum::<f64>() / 3.0)
            .sum();
        let got = mu.pair_scalar(|x, _| x[2]).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 3.0).abs() < 1e-12);
        assert!(matches!(mu.pair_scalar(|x, _| 1.0 / (x[0] - x[0])), Err(Error::NonFiniteValue(0))));
        let vector = mu.pair(|x, v| vec![1.0, x[0], v[2]]).unwrap();
        assert_eq!(vector.len(), 3);
        assert!(vector[2].abs() < 1e-12);
    }

    #[test]
    fn mass_operations() {
        let mu = cube();
        let unit = mu.normalize_mass(1.0).unwrap();
        assert!((unit.total_mass() - 1.0).abs() < 1e-15);
        assert!(unit.weights().iter().all(|w| (w - 1.0 / 12.0).abs() < 1e-15));
        let same = mu.normalize_mass(mu.total_mass()).unwrap();
        assert!(same.weights().iter().zip(mu.weights()).all(|(a, b)| (a - b).abs() < 1e-15));
        let ab = mu.normalize_mass(3.0).unwrap().normalize_mass(7.0).unwrap();
        let b = mu.normalize_mass(7.0).unwrap();
        assert!(ab.weights().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() < 1e-14));
        assert!(mu.scale_weights(0.0).is_err());
    }

    #[test]
    fn sphere_mass() {
        let s = generate_synthetic_shape(&ShapeKind::Ellipsoid { radii: [1.0; 3] }, 24, 0).unwrap();
        let mass = DiscreteVarifold::from_mesh(&s).unwrap().total_mass();
        assert!((mass - 4.0 * PI).abs() / (4.0 * PI) < 0.02);
    }

    #[test]
    fn marginals_keep_weights() {
        let mu = cube();
        let s = mu.spatial_marginal();
        let d = mu.directional_marginal();
        assert_eq!(s.num_atoms(), 12);
        assert_eq!(d.num_atoms(), 12);
        assert_eq!(s.total_mass(), mu.total_mass());
        assert_eq!(d.total_mass(), mu.total_mass());
        for i in 0..12 {
            assert_eq!(s.position(i), mu.position(i));
            assert_eq!(d.direction(i), mu.direction(i));
            // Directions are the six axis vectors.
            assert_eq!(d.direction(i).iter().filter(|c| c.abs() == 1.0).count(), 1);
        }
        let mut counts = std::collections::HashMap::new();
        for i in 0..12 {
            let key: Vec<i64> = d.direction(i).iter().map(|c| *c as i64).collect();
            *counts.entry(key).or_insert(0.0) += d.weights()[i];
        }
        assert_eq!(counts.len(), 6);
        assert!(counts.values().all(|&w| (w - 1.0_f64).abs() < 1e-12));
    }

    #[test]
    fn submeasure_tv() {
        let mu = cube();
        assert_eq!(tv_difference_submeasure(&mu, &mu).unwrap(), 0.0);
        let half = remove_faces(&crate::mesh::fixtures::unit_cube(), 0.5, 9).unwrap();
        let nu = DiscreteVarifold::from_mesh(&half).unwrap();
        assert!((tv_difference_submeasure(&mu, &nu).unwrap() - 3.0).abs() < 1e-12);
        assert!(matches!(tv_difference_submeasure(&nu, &mu), Err(Error::NotSubmeasure)));
        let other = mu.select(&[1, 0]).unwrap();
        assert!(matches!(tv_difference_submeasure(&mu, &other), Err(Error::NotSubmeasure)));
        let moved = nu.scale_weights(2.0).unwrap();
        assert!(matches!(tv_difference_submeasure(&mu, &moved), Err(Error::NotSubmeasure)));
    }

    #[test]
    fn validation() {
        assert!(matches!(DiscreteVarifold::new(2, vec![], vec![], vec![]), Err(Error::EmptyVarifold)));
        assert!(DiscreteVarifold::new(2, vec![0.0; 2], vec![1.0, 1.0], vec![1.0]).is_err());
        assert!(DiscreteVarifold::new(2, vec![0.0; 2], vec![1.0, 0.0], vec![-1.0]).is_err());
        assert!(DiscreteVarifold::new(2, vec![0.0; 3], vec![1.0, 0.0], vec![1.0]).is_err());
        assert!(matches!(
            DiscreteVarifold::new(2, vec![f64::NAN, 0.0], vec![1.0, 0.0], vec![1.0]),
            Err(Error::NonFiniteValue(0))
        ));
    }

    #[test]
    fn concat_adds_pairings() {
        let mu = cube();
        let nu = DiscreteVarifold::new(3, vec![1.0, 2.0, 3.0], vec![0.0, 0.0, -1.0], vec![0.25]).unwrap();
        let h = |x: &[f64], v: &[f64]| x[0] * v[2] + x[1].sin();
        let both = mu.concat(&nu).unwrap();
        let sum = mu.pair_scalar(h).unwrap() + nu.pair_scalar(h).unwrap();
        assert!((both.pair_scalar(h).unwrap() - sum).abs() < 1e-12);
        let flat = DiscreteVarifold::new(2, vec![0.0; 2], vec![1.0, 0.0], vec![1.0]).unwrap();
        assert!(mu.concat(&flat).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let mu = DiscreteVarifold::from_mesh(
            &generate_synthetic_shape(&ShapeKind::from_name("blob").unwrap(), 5, 2).unwrap(),
        )
        .unwrap();
        let text = mu.to_json();
        assert!(text.starts_with("{\"n\":3,\"positions\":[["));
        assert_eq!(DiscreteVarifold::from_json(&text).unwrap(), mu);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mu.json");
        mu.save_json(&path).unwrap();
        assert_eq!(DiscreteVarifold::load_json(&path).unwrap(), mu);
        let bad = r#"{"n":2,"positions":[[0,0,0]],"directions":[[1,0]],"weights":[1]}"#;
        assert!(matches!(DiscreteVarifold::from_json(bad), Err(Error::Schema(_))));
        assert!(matches!(DiscreteVarifold::from_json("{"), Err(Error::Json(_))));
    }
}
