//! Compactly supported spline bumps with C⁴ transitions.

/// The C⁴ smoothstep S(x) = x⁵(126 − 420x + 540x² − 315x³ + 70x⁴), clamped
/// to [0, 1]. Its first four derivatives vanish at both ends.
#[inline]
pub fn smoothstep4(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let x5 = x * x * x * x * x;
        x5 * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + 70.0 * x))))
    }
}

/// A piecewise-polynomial bump: zero outside [a, b], identically one on
/// [c, d], with smoothstep ramps on [a, c] and [d, b].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineBump {
    pub a: f64,
    pub c: f64,
    pub d: f64,
    pub b: f64,
}

impl SplineBump {
    pub fn new(a: f64, c: f64, d: f64, b: f64) -> Self {
        assert!(a < c && c <= d && d < b, "bump knots must satisfy a < c <= d < b");
        Self { a, c, d, b }
    }

    /// Even bump equal to one on [−half, half] and supported on
    /// [−2·half, 2·half].
    pub fn even(half: f64) -> Self {
        Self::new(-2.0 * half, -half, half, 2.0 * half)
    }

    /// The positive-side profile φ₊: support [0.25, 2.5], plateau [0.5, 2].
    pub fn positive() -> Self {
        Self::new(0.25, 0.5, 2.0, 2.5)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.b {
            0.0
        } else if x < self.c {
            smoothstep4((x - self.a) / (self.c - self.a))
        } else if x <= self.d {
            1.0
        } else {
            smoothstep4((self.b - x) / (self.b - self.d))
        }
    }

    /// Knots of the piecewise definition, in increasing order.
    pub fn knots(&self) -> [f64; 4] {
        [self.a, self.c, self.d, self.b]
    }
}
