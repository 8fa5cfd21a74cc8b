//! Degree-2 quadrature rules in barycentric coordinates.
//!
//! Weights sum to one; multiply by the element measure.

/// 4-point degree-2 rule on the tetrahedron: (l0, l1, l2, l3, w).
pub const TET_DEG2: [([f64; 4], f64); 4] = {
    const A: f64 = 0.585_410_196_624_968_5; // (5 + 3*sqrt(5)) / 20
    const B: f64 = 0.138_196_601_125_010_5; // (5 - sqrt(5)) / 20
    [
        ([A, B, B, B], 0.25),
        ([B, A, B, B], 0.25),
        ([B, B, A, B], 0.25),
        ([B, B, B, A], 0.25),
    ]
};

/// 3-point degree-2 rule on the triangle (edge midpoints).
pub const TRI_DEG2: [([f64; 3], f64); 3] = [
    ([0.5, 0.5, 0.0], 1.0 / 3.0),
    ([0.0, 0.5, 0.5], 1.0 / 3.0),
    ([0.5, 0.0, 0.5], 1.0 / 3.0),
];

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact integral of a barycentric monomial over the unit-measure
    /// simplex: prod(alpha_i!) * d! / (sum(alpha) + d)! for a simplex of
    /// dimension d.
    fn exact_monomial(powers: &[u32], dim: u32) -> f64 {
        fn fact(n: u32) -> f64 {
            (1..=n).map(|k| k as f64).product()
        }
        let num: f64 = powers.iter().map(|&p| fact(p)).product::<f64>() * fact(dim);
        let den = fact(powers.iter().sum::<u32>() + dim);
        num / den
    }

    #[test]
    fn tet_rule_exact_to_degree_2() {
        // all monomials l0^a l1^b l2^c l3^d with a+b+c+d <= 2
        for a in 0..=2u32 {
            for b in 0..=2 - a {
                for c in 0..=2 - a - b {
                    for d in 0..=2 - a - b - c {
                        let powers = [a, b, c, d];
                        let mut num = 0.0;
                        for (l, w) in TET_DEG2 {
                            let mut v = w;
                            for (i, &p) in powers.iter().enumerate() {
                                v *= libm::pow(l[i], p as f64);
                            }
                            num += v;
                        }
                        let exact = exact_monomial(&powers, 3);
                        assert!(
                            (num - exact).abs() < 1e-15,
                            "tet monomial {powers:?}: {num} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tri_rule_exact_to_degree_2() {
        for a in 0..=2u32 {
            for b in 0..=2 - a {
                for c in 0..=2 - a - b {
                    let powers = [a, b, c];
                    let mut num = 0.0;
                    for (l, w) in TRI_DEG2 {
                        let mut v = w;
                        for (i, &p) in powers.iter().enumerate() {
                            v *= libm::pow(l[i], p as f64);
                        }
                        num += v;
                    }
                    let exact = exact_monomial(&powers, 2);
                    assert!(
                        (num - exact).abs() < 1e-15,
                        "tri monomial {powers:?}: {num} vs {exact}"
                    );
                }
            }
        }
    }
}
