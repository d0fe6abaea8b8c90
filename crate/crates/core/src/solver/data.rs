//! Initial data for the solver.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{from_diagonal, PhysicalState, SolverState};
use crate::error::{domain, Error, Result};
use crate::spectral::{GridSpec, SpectralField, VectorField};

/// Shape of the initial data. All shapes are centred in the box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Generator {
    Zero,
    /// `eta = exp(-|x - c|^2 / (2 width^2))`, `v = 0`.
    Gaussian { width: f64 },
    /// Random `eta` and velocity potential with Gaussian coefficients damped
    /// by `exp(-(|xi| / cutoff)^2)`; `v = grad phi`.
    RandomSmooth { seed: u64, cutoff: f64 },
    /// Right-moving packet `eta = 2 Re(A(x) exp(i k x_1))` with Gaussian
    /// envelope `A` of the given width, `u_-` the conjugate of `u_+`.
    WavePacket { wavenumber: f64, width: f64 },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    #[serde(flatten)]
    pub generator: Generator,
    /// Multiplies the shape.
    #[serde(default = "one")]
    pub amplitude: f64,
    /// When set, the data is rescaled to this size (see [`data_size`]) and
    /// `amplitude` is ignored.
    #[serde(default)]
    pub d0: Option<f64>,
}

impl DataSpec {
    pub fn new(generator: Generator) -> Self {
        DataSpec {
            generator,
            amplitude: 1.0,
            d0: None,
        }
    }
}

/// `||u_+||_{H^s} + ||u_-||_{H^s}` of the diagonal variables.
pub fn data_size(p: &PhysicalState, s: f64) -> f64 {
    p.size(s)
}

fn centred_square(grid: GridSpec, x: [f64; 2]) -> f64 {
    let c = 0.5 * grid.length;
    (0..grid.d).map(|j| (x[j] - c).powi(2)).sum()
}

fn shape(generator: &Generator, grid: GridSpec) -> Result<PhysicalState> {
    let zero_v = VectorField::zeros(grid);
    match *generator {
        Generator::Zero => Ok(PhysicalState {
            t: 0.0,
            eta: SpectralField::zeros(grid),
            v: zero_v,
        }),
        Generator::Gaussian { width } => {
            if !(width > 0.0) {
                return domain(format!("gaussian width must be positive, got {width}"));
            }
            let eta = SpectralField::from_fn(grid, |x| {
                Complex64::new((-centred_square(grid, x) / (2.0 * width * width)).exp(), 0.0)
            })?;
            Ok(PhysicalState {
                t: 0.0,
                eta: eta.real_part(),
                v: zero_v,
            })
        }
        Generator::RandomSmooth { seed, cutoff } => {
            if !(cutoff > 0.0) {
                return domain(format!("cutoff must be positive, got {cutoff}"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |grid: GridSpec| -> SpectralField {
                let mut f = SpectralField::zeros(grid);
                for i in 1..grid.size() {
                    let freq = grid.frequency(i);
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let damp = (-(freq.norm() / cutoff).powi(2)).exp();
                    let nyquist = (0..grid.d).any(|j| freq.is_nyquist(j));
                    if !nyquist {
                        f.coeffs_mut()[i] = Complex64::new(re, im) * damp;
                    }
                }
                f.real_part()
            };
            let eta = draw(grid);
            let phi = draw(grid);
            let v = VectorField::new(
                (0..grid.d)
                    .map(|j| phi.map_with_frequency(|f, c| c * Complex64::new(0.0, f.xi[j])))
                    .collect(),
            )?;
            Ok(PhysicalState { t: 0.0, eta, v })
        }
        Generator::WavePacket { wavenumber, width } => {
            if !(width > 0.0) {
                return domain(format!("packet width must be positive, got {width}"));
            }
            let up = SpectralField::from_fn(grid, |x| {
                let env = (-centred_square(grid, x) / (2.0 * width * width)).exp();
                Complex64::from_polar(env, wavenumber * x[0])
            })?;
            // u_-(x) = conj(u_+(x)) keeps eta and v real
            let um = SpectralField::from_values(grid, up.to_values().iter().map(|c| c.conj()).collect())?;
            let p = from_diagonal(&SolverState {
                t: 0.0,
                u_plus: up,
                u_minus: um,
            })?;
            // remove the velocity mean left by the envelope's zero mode
            let v = VectorField::new(
                p.v.components()
                    .iter()
                    .map(|c| {
                        let mut c = c.clone();
                        c.coeffs_mut()[0] = Complex64::new(0.0, 0.0);
                        c
                    })
                    .collect(),
            )?;
            Ok(PhysicalState { t: 0.0, eta: p.eta, v })
        }
    }
}

/// Initial data on `grid`; `s` is the Sobolev index used by `spec.d0`.
pub fn generate(spec: &DataSpec, grid: GridSpec, s: f64) -> Result<PhysicalState> {
    grid.validate()?;
    let p = shape(&spec.generator, grid)?;
    let factor = match spec.d0 {
        Some(d0) => {
            if !(d0 >= 0.0 && d0.is_finite()) {
                return Err(Error::Config(format!("d0 must be finite and >= 0, got {d0}")));
            }
            let size = data_size(&p, s);
            if size == 0.0 {
                if d0 == 0.0 {
                    0.0
                } else {
                    return domain("cannot rescale zero data to a positive size");
                }
            } else {
                d0 / size
            }
        }
        None => spec.amplitude,
    };
    let a = Complex64::new(factor, 0.0);
    Ok(PhysicalState {
        t: 0.0,
        eta: p.eta.scale(a),
        v: p.v.map(|c| c.scale(a)),
    })
}
