//! Hyper-dual numbers: one forward pass yields a value, two directional
//! first derivatives, and the mixed second derivative.
//!
//! A hyper-dual number is `v + a·ε₁ + b·ε₂ + c·ε₁ε₂` with two independent
//! nilpotents (`ε₁² = ε₂² = 0`, `ε₁ε₂ ≠ 0`). Seeding both units along the
//! same coordinate makes the mixed slot carry the pure second derivative:
//! the units stay independent even when the directions coincide, so no
//! correction term is needed.

use num_traits::Float;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Truncated two-direction Taylor carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual<T> {
    /// Function value.
    pub v: T,
    /// First derivative along direction a.
    pub da: T,
    /// First derivative along direction b.
    pub db: T,
    /// Mixed second derivative ∂²/∂a∂b.
    pub dab: T,
}

impl<T: Float> HyperDual<T> {
    pub fn new(v: T, da: T, db: T, dab: T) -> Self {
        Self { v, da, db, dab }
    }

    /// A constant: all derivative slots zero.
    pub fn constant(v: T) -> Self {
        Self::new(v, T::zero(), T::zero(), T::zero())
    }

    /// Seed an input coordinate: unit ε₁ if `in_a`, unit ε₂ if `in_b`.
    /// Both flags set means the coordinate is perturbed along both
    /// directions (the diagonal seeding used for pure second derivatives).
    pub fn seeded(v: T, in_a: bool, in_b: bool) -> Self {
        let one = T::one();
        let zero = T::zero();
        Self::new(v, if in_a { one } else { zero }, if in_b { one } else { zero }, zero)
    }

    /// Seed a full input vector for directions `dir_a`, `dir_b`.
    pub fn seed_vector(x: &[T], dir_a: usize, dir_b: usize) -> Vec<Self> {
        x.iter()
            .enumerate()
            .map(|(i, &xi)| Self::seeded(xi, i == dir_a, i == dir_b))
            .collect()
    }

    /// Apply a smooth scalar function given its value and first two
    /// derivatives at `self.v`.
    #[inline]
    fn lift(self, f: T, df: T, d2f: T) -> Self {
        Self {
            v: f,
            da: df * self.da,
            db: df * self.db,
            dab: df * self.dab + d2f * self.da * self.db,
        }
    }

    pub fn recip(self) -> Self {
        let w = self.v;
        let w2 = w * w;
        self.lift(w.recip(), -(w2.recip()), (T::one() + T::one()) / (w2 * w))
    }

    pub fn sin(self) -> Self {
        self.lift(self.v.sin(), self.v.cos(), -self.v.sin())
    }

    pub fn cos(self) -> Self {
        self.lift(self.v.cos(), -self.v.sin(), -self.v.cos())
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.lift(e, e, e)
    }

    pub fn tanh(self) -> Self {
        let th = self.v.tanh();
        let sech2 = T::one() - th * th;
        let two = T::one() + T::one();
        self.lift(th, sech2, -two * th * sech2)
    }

    /// LeakyReLU with the given negative-side slope. The derivative at
    /// exactly zero is the negative-side slope.
    pub fn leaky_relu(self, slope: T) -> Self {
        let g = if self.v > T::zero() { T::one() } else { slope };
        Self {
            v: g * self.v,
            da: g * self.da,
            db: g * self.db,
            dab: g * self.dab,
        }
    }

    /// GeLU (tanh approximation), built compositionally so the derivative
    /// slots stay exact to rounding.
    pub fn gelu(self) -> Self {
        let half = T::from(0.5).unwrap();
        let c1 = T::from(0.797_884_560_802_865_4).unwrap(); // sqrt(2/pi)
        let c2 = T::from(0.044_715).unwrap();
        let x3 = self * self * self;
        let inner = (self + x3 * Self::constant(c2)) * Self::constant(c1);
        let one = Self::constant(T::one());
        self * Self::constant(half) * (one + inner.tanh())
    }
}

impl<T: Float> Add for HyperDual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.v + rhs.v, self.da + rhs.da, self.db + rhs.db, self.dab + rhs.dab)
    }
}

impl<T: Float> Sub for HyperDual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.v - rhs.v, self.da - rhs.da, self.db - rhs.db, self.dab - rhs.dab)
    }
}

impl<T: Float> Neg for HyperDual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.da, -self.db, -self.dab)
    }
}

impl<T: Float> Mul for HyperDual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        // Truncated-Taylor product: the mixed slot collects every way of
        // spending one ε₁ and one ε₂ across the two factors.
        Self::new(
            self.v * rhs.v,
            self.da * rhs.v + self.v * rhs.da,
            self.db * rhs.v + self.v * rhs.db,
            self.dab * rhs.v + self.da * rhs.db + self.db * rhs.da + self.v * rhs.dab,
        )
    }
}

impl<T: Float> Div for HyperDual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type Hd = HyperDual<f64>;

    /// ∂²(x₁·x₂²)/∂x₁∂x₂ at (2,3): symbolic oracle gives 2·x₂ = 6.
    #[test]
    fn product_example_matches_symbolic_oracle() {
        let x = Hd::seeded(2.0, true, false);
        let y = Hd::seeded(3.0, false, true);
        let f = x * y * y;
        assert_abs_diff_eq!(f.v, 18.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.da, 9.0, epsilon = 1e-14); // x₂²
        assert_abs_diff_eq!(f.db, 12.0, epsilon = 1e-14); // 2·x₁·x₂
        assert_abs_diff_eq!(f.dab, 6.0, epsilon = 1e-14); // 2·x₂
    }

    #[test]
    fn diagonal_seed_gives_pure_second_derivative() {
        // f(x) = x³ at x=2: f'' = 6x = 12.
        let x = Hd::seeded(2.0, true, true);
        let f = x * x * x;
        assert_abs_diff_eq!(f.da, 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.dab, 12.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_function_has_zero_mixed_slot() {
        let x = Hd::seeded(1.3, true, false);
        let y = Hd::seeded(-0.4, false, true);
        let f = x * Hd::constant(2.5) + y * Hd::constant(-1.5) + Hd::constant(0.7);
        assert_eq!(f.dab, 0.0);
    }

    #[test]
    fn quotient_matches_symbolic() {
        // f = x/y at (1,2): ∂²f/∂x∂y = -1/y² = -0.25.
        let x = Hd::seeded(1.0, true, false);
        let y = Hd::seeded(2.0, false, true);
        let f = x / y;
        assert_abs_diff_eq!(f.v, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.da, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f.db, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(f.dab, -0.25, epsilon = 1e-15);
    }

    #[test]
    fn tanh_second_derivative() {
        // (tanh x)'' = -2 tanh(x) sech²(x)
        let x = Hd::seeded(0.37, true, true);
        let f = x.tanh();
        let th: f64 = 0.37f64.tanh();
        assert_abs_diff_eq!(f.dab, -2.0 * th * (1.0 - th * th), epsilon = 1e-14);
    }

    #[test]
    fn gelu_matches_finite_differences() {
        let x0 = 0.61;
        let f = Hd::seeded(x0, true, true).gelu();
        let h = 1e-5;
        let g = |x: f64| Hd::constant(x).gelu().v;
        let fd1 = (g(x0 + h) - g(x0 - h)) / (2.0 * h);
        let fd2 = (g(x0 + h) - 2.0 * g(x0) + g(x0 - h)) / (h * h);
        assert_abs_diff_eq!(f.da, fd1, epsilon = 1e-8);
        assert_abs_diff_eq!(f.dab, fd2, epsilon = 1e-4);
    }

    #[test]
    fn leaky_relu_uses_negative_slope_at_zero() {
        let x = Hd::seeded(0.0, true, true);
        let f = x.leaky_relu(0.01);
        assert_eq!(f.da, 0.01);
    }

    proptest! {
        /// Composing polynomials through hyper-duals equals the analytic
        /// composition: p(q(x)) with p = u² + u, q = 2x² - x.
        #[test]
        fn chain_rule_on_polynomials(x0 in -3.0f64..3.0) {
            let x = Hd::seeded(x0, true, true);
            let q = x * x * Hd::constant(2.0) - x;
            let p = q * q + q;
            // analytic: q = 2x²-x, q' = 4x-1, q'' = 4
            // p(u) = u²+u, p' = 2u+1, p'' = 2
            let qv = 2.0 * x0 * x0 - x0;
            let qd = 4.0 * x0 - 1.0;
            let exact_first = (2.0 * qv + 1.0) * qd;
            let exact_second = 2.0 * qd * qd + (2.0 * qv + 1.0) * 4.0;
            prop_assert!((p.da - exact_first).abs() <= 1e-10 * (1.0 + exact_first.abs()));
            prop_assert!((p.dab - exact_second).abs() <= 1e-10 * (1.0 + exact_second.abs()));
        }

        /// Mixed partials commute: swapping the seeding of the two
        /// directions leaves the mixed slot unchanged.
        #[test]
        fn mixed_slot_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let f = |x: Hd, y: Hd| (x * y).sin() + x * x * y;
            let fab = f(Hd::seeded(a, true, false), Hd::seeded(b, false, true));
            let fba = f(Hd::seeded(a, false, true), Hd::seeded(b, true, false));
            prop_assert!((fab.dab - fba.dab).abs() < 1e-12);
        }

        /// Product-rule invariant for the mixed slot.
        #[test]
        fn product_rule_mixed_slot(
            uv in -2.0f64..2.0, ua in -2.0f64..2.0, ub in -2.0f64..2.0, uab in -2.0f64..2.0,
            vv in -2.0f64..2.0, va in -2.0f64..2.0, vb in -2.0f64..2.0, vab in -2.0f64..2.0,
        ) {
            let u = Hd::new(uv, ua, ub, uab);
            let v = Hd::new(vv, va, vb, vab);
            let z = u * v;
            let expect = uab * vv + ua * vb + ub * va + uv * vab;
            prop_assert!((z.dab - expect).abs() < 1e-12);
        }
    }
}
