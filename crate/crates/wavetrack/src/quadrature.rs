//! Triangle quadrature rules in barycentric coordinates.
//!
//! Weights are normalized to sum to 1, so an integral over a physical
//! triangle is area times the weighted sum of integrand values. The default
//! rule for target-dependent integrals is the 6-point degree-4 rule; the
//! degree-6 and degree-8 rules are collapsed Gauss-Legendre products kept
//! as independent cross-check oracles, and [`QuadratureRule::split`] turns
//! any rule into its composite on four congruent subtriangles (used for
//! discontinuous data, where no polynomial rule is exact).

use crate::mesh::Point;

/// Quadrature rule on the reference triangle.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
}

/// Symmetric 6-point rule, exact for polynomials of total degree 4.
pub fn degree4() -> QuadratureRule {
    const A1: f64 = 0.4459484909159649;
    const W1: f64 = 0.22338158967801147;
    const A2: f64 = 0.09157621350977074;
    const W2: f64 = 0.10995174365532187;
    let mut points = Vec::with_capacity(6);
    let mut weights = Vec::with_capacity(6);
    for (a, w) in [(A1, W1), (A2, W2)] {
        let b = 1.0 - 2.0 * a;
        for p in [[b, a, a], [a, b, a], [a, a, b]] {
            points.push(p);
            weights.push(w);
        }
    }
    QuadratureRule {
        points,
        weights,
        degree: 4,
    }
}

/// 16-point collapsed Gauss product rule, exact to total degree 6.
pub fn degree6() -> QuadratureRule {
    const NODES: [f64; 4] = [
        0.06943184420297371,
        0.33000947820757187,
        0.6699905217924281,
        0.9305681557970263,
    ];
    const WEIGHTS: [f64; 4] = [
        0.17392742256872692,
        0.32607257743127305,
        0.32607257743127305,
        0.17392742256872692,
    ];
    collapsed_product(&NODES, &WEIGHTS, 6)
}

/// 25-point collapsed Gauss product rule, exact to total degree 8.
pub fn degree8() -> QuadratureRule {
    const NODES: [f64; 5] = [
        0.046910077030668004,
        0.23076534494715845,
        0.5,
        0.7692346550528415,
        0.953089922969332,
    ];
    const WEIGHTS: [f64; 5] = [
        0.11846344252809454,
        0.23931433524968324,
        0.28444444444444444,
        0.23931433524968324,
        0.11846344252809454,
    ];
    collapsed_product(&NODES, &WEIGHTS, 8)
}

/// Duffy transform of a [0,1] Gauss rule: x = u, y = v(1-u). The Jacobian
/// (1-u) raises the u-degree by one, so an n-point Gauss rule (1D degree
/// 2n-1) yields triangle degree 2n-2.
fn collapsed_product(nodes: &[f64], gauss_weights: &[f64], degree: usize) -> QuadratureRule {
    let mut points = Vec::with_capacity(nodes.len() * nodes.len());
    let mut weights = Vec::with_capacity(nodes.len() * nodes.len());
    for (&u, &wu) in nodes.iter().zip(gauss_weights) {
        for (&v, &wv) in nodes.iter().zip(gauss_weights) {
            let x = u;
            let y = v * (1.0 - u);
            points.push([1.0 - x - y, x, y]);
            weights.push(2.0 * wu * wv * (1.0 - u));
        }
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}

impl QuadratureRule {
    /// Barycentric quadrature points.
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Weights, summing to 1.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Polynomial exactness degree (of the base rule; composite rules keep
    /// their base degree).
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Composite rule applying `self` on each of the four congruent
    /// subtriangles obtained by connecting the edge midpoints.
    pub fn split(&self) -> QuadratureRule {
        // Subtriangle corners in barycentric coordinates of the parent.
        const V0: [f64; 3] = [1.0, 0.0, 0.0];
        const V1: [f64; 3] = [0.0, 1.0, 0.0];
        const V2: [f64; 3] = [0.0, 0.0, 1.0];
        const M01: [f64; 3] = [0.5, 0.5, 0.0];
        const M12: [f64; 3] = [0.0, 0.5, 0.5];
        const M20: [f64; 3] = [0.5, 0.0, 0.5];
        let children = [
            [V0, M01, M20],
            [M01, V1, M12],
            [M20, M12, V2],
            [M01, M12, M20],
        ];
        let mut points = Vec::with_capacity(4 * self.points.len());
        let mut weights = Vec::with_capacity(4 * self.weights.len());
        for child in children {
            for (p, &w) in self.points.iter().zip(&self.weights) {
                let mut q = [0.0; 3];
                for dim in 0..3 {
                    q[dim] = p[0] * child[0][dim] + p[1] * child[1][dim] + p[2] * child[2][dim];
                }
                points.push(q);
                weights.push(0.25 * w);
            }
        }
        QuadratureRule {
            points,
            weights,
            degree: self.degree,
        }
    }

    /// Physical location of barycentric point `p` in the triangle with the
    /// given corners.
    pub fn physical_point(p: [f64; 3], corners: &[Point; 3]) -> Point {
        [
            p[0] * corners[0][0] + p[1] * corners[1][0] + p[2] * corners[2][0],
            p[0] * corners[0][1] + p[1] * corners[1][1] + p[2] * corners[2][1],
        ]
    }

    /// Integrates `f(x, t)` over the triangle with the given corners and
    /// area.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, corners: &[Point; 3], area: f64, f: F) -> f64 {
        let mut sum = 0.0;
        for (p, &w) in self.points.iter().zip(&self.weights) {
            let [x, t] = Self::physical_point(*p, corners);
            sum += w * f(x, t);
        }
        area * sum
    }
}
