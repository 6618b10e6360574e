//! Symmetric triangle rules and Gauss-Legendre rules on [0, 1].

/// A quadrature rule on the reference triangle (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct Quadrature {
    /// Barycentric coordinates (λ0, λ1, λ2) of each point.
    pub points: Vec<[f64; 3]>,
    /// Weights summing to the reference area 1/2.
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub order: usize,
}

fn orbit3(a: f64) -> [[f64; 3]; 3] {
    let b = 1.0 - 2.0 * a;
    [[a, a, b], [a, b, a], [b, a, a]]
}

fn orbit6(a: f64, b: f64) -> [[f64; 3]; 6] {
    let c = 1.0 - a - b;
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

impl Quadrature {
    /// Dunavant rules of degree 1, 2, 4 and 6; other requests round up.
    pub fn triangle(order: usize) -> Self {
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut push = |pts: &[[f64; 3]], w: f64| {
            for p in pts {
                points.push(*p);
                weights.push(0.5 * w);
            }
        };
        let order = match order {
            0 | 1 => {
                push(&[[1.0 / 3.0; 3]], 1.0);
                1
            }
            2 => {
                push(&orbit3(1.0 / 6.0), 1.0 / 3.0);
                2
            }
            3 | 4 => {
                push(&orbit3(0.445_948_490_915_965), 0.223_381_589_678_011);
                push(&orbit3(0.091_576_213_509_771), 0.109_951_743_655_322);
                4
            }
            _ => {
                push(&orbit3(0.249_286_745_170_910), 0.116_786_275_726_379);
                push(&orbit3(0.063_089_014_491_502), 0.050_844_906_370_207);
                push(
                    &orbit6(0.053_145_049_844_817, 0.310_352_451_033_784),
                    0.082_851_075_618_374,
                );
                6
            }
        };
        Self { points, weights, order }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre points and weights on [0, 1]; `npts` in 1..=3.
pub fn gauss_line(npts: usize) -> Vec<(f64, f64)> {
    match npts {
        1 => vec![(0.5, 1.0)],
        2 => {
            let d = 0.5 / 3f64.sqrt();
            vec![(0.5 - d, 0.5), (0.5 + d, 0.5)]
        }
        _ => {
            let d = 0.5 * (0.6f64).sqrt();
            vec![(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
        }
    }
}
