//! Forward-mode differentiation over real coordinates and the mapping of
//! real partials onto Wirtinger partials.
//!
//! A point is a flat list of reals. The first `2·n_complex` entries are the
//! real and imaginary parts of the complex coordinates
//! `q_k = x_{2k} + j·x_{2k+1}` (zero-based), the remaining `n_real` entries are
//! plain real coordinates. For a real-valued `f`:
//!
//! ```text
//! ∂f/∂q_k  = (∂f/∂x_{2k} − j·∂f/∂x_{2k+1}) / 2
//! ∂f/∂q*_k = (∂f/∂x_{2k} + j·∂f/∂x_{2k+1}) / 2
//! ```
//!
//! The partials stored in [`WirtingerDerivatives`] are the bare ones above.
//! Flux-like quantities `2·∂f/∂q*` are formed by the caller.

mod cx;
mod dual;

pub use cx::Cx;
pub use dual::{Dual2, Scalar};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of real coordinates supported by the dense dual numbers.
pub const MAX_COORDS: usize = 8;

/// Number of complex and real coordinates in a [`RealPoint`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n_complex: usize,
    pub n_real: usize,
}

impl Layout {
    pub fn new(n_complex: usize, n_real: usize) -> Self {
        Self { n_complex, n_real }
    }

    pub fn len(&self) -> usize {
        2 * self.n_complex + self.n_real
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Real coordinates together with their complex/real layout.
#[derive(Clone, Debug, PartialEq)]
pub struct RealPoint {
    coords: Vec<f64>,
    layout: Layout,
}

impl RealPoint {
    pub fn new(coords: Vec<f64>, layout: Layout) -> Result<Self> {
        if coords.len() != layout.len() {
            return Err(Error::Argument(format!(
                "{} coordinates do not fit a layout of {} complex + {} real",
                coords.len(),
                layout.n_complex,
                layout.n_real
            )));
        }
        Ok(Self { coords, layout })
    }

    /// Packs complex coordinates followed by real ones.
    pub fn from_parts(complex: &[Complex64], real: &[f64]) -> Self {
        let mut coords = Vec::with_capacity(2 * complex.len() + real.len());
        for z in complex {
            coords.push(z.re);
            coords.push(z.im);
        }
        coords.extend_from_slice(real);
        Self {
            coords,
            layout: Layout::new(complex.len(), real.len()),
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn complex(&self, k: usize) -> Complex64 {
        Complex64::new(self.coords[2 * k], self.coords[2 * k + 1])
    }
}

/// A scalar function that can be evaluated on any [`Scalar`].
pub trait RealFunction {
    fn eval<T: Scalar>(&self, x: &[T]) -> Result<T>;
}

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Taylor2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

fn second_order_fixed<const N: usize, F: RealFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Taylor2> {
    let vars: Vec<Dual2<N>> = x.iter().enumerate().map(|(k, &v)| Dual2::variable(v, k)).collect();
    let out = f.eval(&vars)?;
    Ok(Taylor2 {
        value: out.value,
        gradient: out.grad.to_vec(),
        hessian: DMatrix::from_fn(N, N, |i, j| out.hess[i][j]),
    })
}

/// Value, gradient and Hessian in a single forward pass.
pub fn second_order<F: RealFunction + ?Sized>(f: &F, x: &[f64]) -> Result<Taylor2> {
    match x.len() {
        1 => second_order_fixed::<1, F>(f, x),
        2 => second_order_fixed::<2, F>(f, x),
        3 => second_order_fixed::<3, F>(f, x),
        4 => second_order_fixed::<4, F>(f, x),
        5 => second_order_fixed::<5, F>(f, x),
        6 => second_order_fixed::<6, F>(f, x),
        7 => second_order_fixed::<7, F>(f, x),
        8 => second_order_fixed::<8, F>(f, x),
        n => Err(Error::Argument(format!(
            "{n} coordinates; between 1 and {MAX_COORDS} are supported"
        ))),
    }
}

/// `∂f/∂x_k` for every coordinate, exact up to floating-point rounding.
pub fn real_gradient<F: RealFunction + ?Sized>(f: &F, x: &RealPoint) -> Result<Vec<f64>> {
    Ok(second_order(f, x.coords())?.gradient)
}

/// `∂²f/∂x_k∂x_l`, symmetric by construction.
pub fn real_hessian<F: RealFunction + ?Sized>(f: &F, x: &RealPoint) -> Result<DMatrix<f64>> {
    Ok(second_order(f, x.coords())?.hessian)
}

/// Wirtinger partials per complex coordinate and plain partials per real
/// coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct WirtingerDerivatives {
    pub d_dq: Vec<Complex64>,
    pub d_dqstar: Vec<Complex64>,
    pub d_dreal: Vec<f64>,
    /// Hessian over all real coordinates, when it was computed.
    pub real_hessian: Option<DMatrix<f64>>,
}

/// Maps a real gradient onto Wirtinger form.
pub fn wirtinger_from_real(real_grad: &[f64], layout: Layout) -> Result<WirtingerDerivatives> {
    if real_grad.len() != layout.len() {
        return Err(Error::Argument(format!(
            "gradient of length {} does not match layout ({} complex, {} real)",
            real_grad.len(),
            layout.n_complex,
            layout.n_real
        )));
    }
    let mut d_dq = Vec::with_capacity(layout.n_complex);
    let mut d_dqstar = Vec::with_capacity(layout.n_complex);
    for k in 0..layout.n_complex {
        let (gx, gy) = (real_grad[2 * k], real_grad[2 * k + 1]);
        d_dq.push(Complex64::new(0.5 * gx, -0.5 * gy));
        d_dqstar.push(Complex64::new(0.5 * gx, 0.5 * gy));
    }
    Ok(WirtingerDerivatives {
        d_dq,
        d_dqstar,
        d_dreal: real_grad[2 * layout.n_complex..].to_vec(),
        real_hessian: None,
    })
}

/// Full Wirtinger derivatives of `f` at `x`, Hessian included.
pub fn wirtinger<F: RealFunction + ?Sized>(f: &F, x: &RealPoint) -> Result<WirtingerDerivatives> {
    let t = second_order(f, x.coords())?;
    let mut w = wirtinger_from_real(&t.gradient, x.layout())?;
    w.real_hessian = Some(t.hessian);
    Ok(w)
}
