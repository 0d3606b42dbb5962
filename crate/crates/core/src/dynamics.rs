//! Single-excitation amplitude dynamics.
//!
//! Three routes are provided:
//!
//! * [`integrate_full`]: the five coupled amplitude equations under the
//!   non-Hermitian effective Hamiltonian, with decay and detunings.
//! * [`reduced_propagate`]: the exact solution of the three emitter
//!   amplitudes after adiabatic elimination of both cavity modes, obtained
//!   from the eigendecomposition of the symmetric [`ReducedGenerator`].
//! * [`decaying_closed_form_qab`] and [`closed_form_cavity`]: the
//!   two-exponential closed forms. The cavity form is exact; the emitter form
//!   omits the stationary dark component and is kept for audit only.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_effective_rates, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Real amplitudes of `|E,g>`, `|G,+>`, `|G,->` (cavity in vacuum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterAmplitudes {
    pub q: f64,
    pub a: f64,
    pub b: f64,
}

impl EmitterAmplitudes {
    pub fn new(q: f64, a: f64, b: f64) -> Self {
        Self { q, a, b }
    }

    pub fn norm2(&self) -> f64 {
        self.q * self.q + self.a * self.a + self.b * self.b
    }

    fn to_vector(self) -> Vector3<f64> {
        Vector3::new(self.q, self.a, self.b)
    }

    fn from_vector(v: Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

/// The five single-excitation amplitudes at time `t` (units of `1/kappa`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeState {
    pub t: f64,
    pub q: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl AmplitudeState {
    /// QD excited, atom in ground state, both modes empty.
    pub fn excited_qd() -> Self {
        Self::from_emitters(0.0, EmitterAmplitudes::new(1.0, 0.0, 0.0))
    }

    /// Embeds real emitter amplitudes with zero cavity amplitude.
    pub fn from_emitters(t: f64, e: EmitterAmplitudes) -> Self {
        Self {
            t,
            q: e.q.into(),
            a: e.a.into(),
            b: e.b.into(),
            alpha: Complex64::default(),
            beta: Complex64::default(),
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 5] {
        [self.q, self.a, self.b, self.alpha, self.beta]
    }

    fn from_amplitudes(t: f64, z: [Complex64; 5]) -> Self {
        Self {
            t,
            q: z[0],
            a: z[1],
            b: z[2],
            alpha: z[3],
            beta: z[4],
        }
    }

    pub fn norm2(&self) -> f64 {
        self.amplitudes().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `<e|psi>` for a real emitter-only state `e`.
    pub fn overlap(&self, e: &EmitterAmplitudes) -> Complex64 {
        self.q * e.q + self.a * e.a + self.b * e.b
    }
}

fn derivative(p: &SystemParams, z: &[Complex64; 5]) -> [Complex64; 5] {
    let [q, a, b, alpha, beta] = *z;
    let damp = |gamma: f64, delta: f64| Complex64::new(0.5 * gamma, delta);
    [
        -damp(p.gamma_q(), p.delta_q()) * q - I * p.g_q() * alpha - I * p.g_q() * beta,
        -damp(p.gamma_a(), p.delta_a()) * a - I * p.g_a() * alpha,
        -damp(p.gamma_b(), p.delta_b()) * b - I * p.g_b() * beta,
        -p.kappa() * alpha - I * p.g_q() * q - I * p.g_a() * a,
        -p.kappa() * beta - I * p.g_q() * q - I * p.g_b() * b,
    ]
}

/// Time derivatives `(Q, A, B, alpha, beta)` of the amplitude equations.
pub fn full_rhs(state: &AmplitudeState, params: &SystemParams) -> [Complex64; 5] {
    derivative(params, &state.amplitudes())
}

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Stepping {
    /// Classical fourth-order Runge-Kutta at a constant step.
    Fixed { dt: f64 },
    /// Dormand-Prince 5(4) with per-step error control.
    Adaptive {
        rtol: f64,
        atol: f64,
        initial_dt: f64,
        min_dt: f64,
        max_dt: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub stepping: Stepping,
    /// Minimum spacing of recorded samples; `None` records every step.
    pub record_interval: Option<f64>,
    pub max_steps: u64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self::fixed(0.01)
    }
}

impl StepControl {
    pub fn fixed(dt: f64) -> Self {
        Self {
            stepping: Stepping::Fixed { dt },
            record_interval: None,
            max_steps: 1_000_000_000,
        }
    }

    pub fn adaptive(tol: f64) -> Self {
        Self {
            stepping: Stepping::Adaptive {
                rtol: tol,
                atol: tol,
                initial_dt: 0.01,
                min_dt: 1e-12,
                max_dt: 1e3,
            },
            record_interval: None,
            max_steps: 100_000_000,
        }
    }

    pub fn recording_every(mut self, interval: f64) -> Self {
        self.record_interval = Some(interval);
        self
    }

    /// Records about `samples` evenly spaced states over `horizon`.
    pub fn recording_samples(self, horizon: f64, samples: u64) -> Self {
        self.recording_every(horizon / samples.max(1) as f64)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v,
                    reason: "must be positive and finite",
                })
            }
        };
        match self.stepping {
            Stepping::Fixed { dt } => positive("dt", dt)?,
            Stepping::Adaptive {
                rtol,
                atol,
                initial_dt,
                min_dt,
                max_dt,
            } => {
                positive("rtol", rtol)?;
                positive("atol", atol)?;
                positive("initial_dt", initial_dt)?;
                positive("min_dt", min_dt)?;
                positive("max_dt", max_dt)?;
                if min_dt > max_dt {
                    return Err(Error::InvalidInput("min_dt exceeds max_dt".into()));
                }
            }
        }
        if let Some(iv) = self.record_interval {
            positive("record_interval", iv)?;
        }
        Ok(())
    }
}

/// Cumulative photon-emission probability `2 kappa int |amp|^2 dt` per mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EmittedProbability {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: SystemParams,
    pub samples: Vec<AmplitudeState>,
    /// Emission tallies integrated alongside the amplitudes, one per sample.
    pub emitted: Vec<EmittedProbability>,
    pub step_control: StepControl,
    pub steps_taken: u64,
}

impl Trajectory {
    pub fn last(&self) -> &AmplitudeState {
        self.samples
            .last()
            .expect("trajectory always holds the initial state")
    }

    pub fn final_emission(&self) -> EmittedProbability {
        *self
            .emitted
            .last()
            .expect("trajectory always holds the initial state")
    }
}

// Packed integration state: re/im of the five amplitudes, then the two
// cumulative emission probabilities.
const DIM: usize = 12;
type Packed = [f64; DIM];

fn pack(z: &[Complex64; 5], emitted: EmittedProbability) -> Packed {
    let mut y = [0.0; DIM];
    for (k, zk) in z.iter().enumerate() {
        y[2 * k] = zk.re;
        y[2 * k + 1] = zk.im;
    }
    y[10] = emitted.a;
    y[11] = emitted.b;
    y
}

fn unpack(y: &Packed) -> ([Complex64; 5], EmittedProbability) {
    let mut z = [Complex64::default(); 5];
    for (k, zk) in z.iter_mut().enumerate() {
        *zk = Complex64::new(y[2 * k], y[2 * k + 1]);
    }
    (z, EmittedProbability { a: y[10], b: y[11] })
}

fn packed_rhs(p: &SystemParams, y: &Packed) -> Packed {
    let (z, _) = unpack(y);
    let dz = derivative(p, &z);
    let two_kappa = 2.0 * p.kappa();
    pack(
        &dz,
        EmittedProbability {
            a: two_kappa * z[3].norm_sqr(),
            b: two_kappa * z[4].norm_sqr(),
        },
    )
}

fn axpy(y: &Packed, h: f64, terms: &[(f64, &Packed)]) -> Packed {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..DIM {
                out[i] += h * c * k[i];
            }
        }
    }
    out
}

fn rk4_step(p: &SystemParams, y: &Packed, h: f64) -> Packed {
    let k1 = packed_rhs(p, y);
    let k2 = packed_rhs(p, &axpy(y, h, &[(0.5, &k1)]));
    let k3 = packed_rhs(p, &axpy(y, h, &[(0.5, &k2)]));
    let k4 = packed_rhs(p, &axpy(y, h, &[(1.0, &k3)]));
    axpy(
        y,
        h,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    )
}

/// One Dormand-Prince step; returns the fifth-order solution and the
/// embedded error estimate.
fn dopri_step(p: &SystemParams, y: &Packed, h: f64) -> (Packed, Packed) {
    let k1 = packed_rhs(p, y);
    let k2 = packed_rhs(p, &axpy(y, h, &[(1.0 / 5.0, &k1)]));
    let k3 = packed_rhs(p, &axpy(y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]));
    let k4 = packed_rhs(
        p,
        &axpy(
            y,
            h,
            &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)],
        ),
    );
    let k5 = packed_rhs(
        p,
        &axpy(
            y,
            h,
            &[
                (19372.0 / 6561.0, &k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
        ),
    );
    let k6 = packed_rhs(
        p,
        &axpy(
            y,
            h,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[
            (35.0 / 384.0, &k1),
            (500.0 / 1113.0, &k3),
            (125.0 / 192.0, &k4),
            (-2187.0 / 6784.0, &k5),
            (11.0 / 84.0, &k6),
        ],
    );
    let k7 = packed_rhs(p, &y5);
    // b5 - b4
    let e = [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ];
    let zero = [0.0; DIM];
    let err = axpy(
        &zero,
        h,
        &[
            (e[0], &k1),
            (e[2], &k3),
            (e[3], &k4),
            (e[4], &k5),
            (e[5], &k6),
            (e[6], &k7),
        ],
    );
    (y5, err)
}

struct Recorder {
    interval: Option<f64>,
    next_mark: f64,
    samples: Vec<AmplitudeState>,
    emitted: Vec<EmittedProbability>,
}

impl Recorder {
    fn new(interval: Option<f64>, initial: AmplitudeState, e0: EmittedProbability) -> Self {
        Self {
            interval,
            next_mark: initial.t + interval.unwrap_or(0.0),
            samples: vec![initial],
            emitted: vec![e0],
        }
    }

    fn offer(&mut self, t: f64, y: &Packed, last: bool) {
        let due = match self.interval {
            None => true,
            Some(iv) => {
                if t >= self.next_mark {
                    while self.next_mark <= t {
                        self.next_mark += iv;
                    }
                    true
                } else {
                    false
                }
            }
        };
        if due || last {
            let (z, e) = unpack(y);
            self.samples.push(AmplitudeState::from_amplitudes(t, z));
            self.emitted.push(e);
        }
    }
}

fn failure(t: f64, y: &Packed, reason: impl Into<String>) -> Error {
    let (z, _) = unpack(y);
    Error::IntegrationFailure {
        t,
        reason: reason.into(),
        last_good: Box::new(AmplitudeState::from_amplitudes(t, z)),
    }
}

/// Integrates the full five-amplitude system from `initial` for `horizon`
/// time units. Photon-emission probabilities per mode are accumulated with
/// the same scheme and returned alongside the samples.
pub fn integrate_full(
    params: &SystemParams,
    initial: &AmplitudeState,
    horizon: f64,
    control: &StepControl,
) -> Result<Trajectory> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter {
            name: "horizon",
            value: horizon,
            reason: "must be positive and finite",
        });
    }
    control.validate()?;

    let t0 = initial.t;
    let mut y = pack(&initial.amplitudes(), EmittedProbability::default());
    let mut rec = Recorder::new(
        control.record_interval,
        *initial,
        EmittedProbability::default(),
    );
    let mut steps = 0u64;

    match control.stepping {
        Stepping::Fixed { dt } => {
            let n = (horizon / dt).ceil() as u64;
            if n > control.max_steps {
                return Err(failure(t0, &y, format!("{n} steps exceed max_steps")));
            }
            for k in 1..=n {
                let t_prev = t0 + (k - 1) as f64 * dt;
                let next = rk4_step(params, &y, dt);
                if next.iter().any(|v| !v.is_finite()) {
                    return Err(failure(t_prev, &y, "non-finite state"));
                }
                y = next;
                steps += 1;
                rec.offer(t0 + k as f64 * dt, &y, k == n);
            }
        }
        Stepping::Adaptive {
            rtol,
            atol,
            initial_dt,
            min_dt,
            max_dt,
        } => {
            let t_end = t0 + horizon;
            let mut t = t0;
            let mut h = initial_dt.min(max_dt);
            while t < t_end {
                if steps >= control.max_steps {
                    return Err(failure(t, &y, "max_steps exceeded"));
                }
                let last = t + h >= t_end;
                let h_try = if last { t_end - t } else { h };
                let (next, err) = dopri_step(params, &y, h_try);
                let ratio = err
                    .iter()
                    .zip(y.iter().zip(next.iter()))
                    .map(|(e, (a, b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
                    .fold(0.0, f64::max);
                if !ratio.is_finite() {
                    return Err(failure(t, &y, "non-finite error estimate"));
                }
                let factor = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                if ratio <= 1.0 {
                    t = if last { t_end } else { t + h_try };
                    y = next;
                    steps += 1;
                    rec.offer(t, &y, t >= t_end);
                    if !last {
                        h = (h_try * factor).min(max_dt);
                    }
                } else {
                    h = h_try * factor;
                    if h < min_dt {
                        return Err(failure(t, &y, format!("step size {h:e} below min_dt")));
                    }
                }
            }
        }
    }

    Ok(Trajectory {
        params: *params,
        samples: rec.samples,
        emitted: rec.emitted,
        step_control: *control,
        steps_taken: steps,
    })
}

/// Generator of the emitter amplitudes `(Q, A, B)` after adiabatic
/// elimination of the cavity: `d/dt x = M x` with `M` real symmetric and
/// negative semi-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGenerator {
    pub matrix: Matrix3<f64>,
    /// `(0, lambda_plus, lambda_minus)`, from the closed-form rates.
    pub eigenvalues: Vector3<f64>,
    /// Orthonormal eigenvectors, columns matching `eigenvalues`.
    pub eigenvectors: Matrix3<f64>,
}

impl ReducedGenerator {
    pub fn new(params: &SystemParams) -> Self {
        let r = derive_effective_rates(params);
        let (gq, ga, gb) = (r.cavity_decay_q, r.cavity_decay_a, r.cavity_decay_b);
        let qa = (0.5 * gq * ga).sqrt();
        let qb = (0.5 * gq * gb).sqrt();
        let matrix = -Matrix3::new(gq, qa, qb, qa, ga, 0.0, qb, 0.0, gb);

        let eigenvalues = Vector3::new(0.0, r.lambda_plus, r.lambda_minus);
        let eigenvectors = closed_form_eigenvectors(&matrix, &eigenvalues)
            .unwrap_or_else(|| iterative_eigenvectors(&matrix, &eigenvalues));
        Self {
            matrix,
            eigenvalues,
            eigenvectors,
        }
    }

    /// Unit eigenvector of the null eigenvalue.
    pub fn null_vector(&self) -> EmitterAmplitudes {
        EmitterAmplitudes::from_vector(self.eigenvectors.column(0).into_owned())
    }

    /// `exp(M t) x0` through the spectral decomposition; `t = +inf` keeps only
    /// the null-space projection.
    pub fn propagate(&self, initial: EmitterAmplitudes, t: f64) -> EmitterAmplitudes {
        let x0 = initial.to_vector();
        let mut out = Vector3::zeros();
        for k in 0..3 {
            let v = self.eigenvectors.column(k);
            let lambda = self.eigenvalues[k];
            let weight = if lambda == 0.0 {
                1.0
            } else {
                (lambda * t).exp()
            };
            out += v * (weight * v.dot(&x0));
        }
        EmitterAmplitudes::from_vector(out)
    }
}

/// Eigenvectors of a symmetric 3x3 matrix with known, well separated
/// eigenvalues: each is the largest cross product of two rows of `M - lambda`.
/// `None` when two eigenvalues are too close for that to be accurate.
fn closed_form_eigenvectors(m: &Matrix3<f64>, eigenvalues: &Vector3<f64>) -> Option<Matrix3<f64>> {
    let scale = m.amax();
    if scale == 0.0 {
        return None;
    }
    let mut out = Matrix3::zeros();
    for k in 0..3 {
        let shifted = m - Matrix3::identity() * eigenvalues[k];
        let rows = [0, 1, 2].map(|i| shifted.row(i).transpose());
        let best = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| rows[i].cross(&rows[j]))
            .max_by(|a, b| a.norm_squared().total_cmp(&b.norm_squared()))?;
        let norm = best.norm();
        if norm.is_nan() || norm <= 1e-8 * scale * scale {
            return None;
        }
        out.set_column(k, &(best / norm));
    }
    let gram = out.transpose() * out - Matrix3::identity();
    (gram.amax() < 1e-10).then_some(out)
}

/// Fallback for (near-)degenerate spectra: iterative symmetric eigensolver,
/// columns matched to `eigenvalues` by proximity.
fn iterative_eigenvectors(m: &Matrix3<f64>, eigenvalues: &Vector3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(*m);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut out = Matrix3::zeros();
    for (dst, &src) in order.iter().enumerate() {
        out.set_column(dst, &eig.eigenvectors.column(src));
    }
    debug_assert!((0..3).all(|k| {
        let tol = 1e-9 * m.amax().max(f64::MIN_POSITIVE);
        (eig.eigenvalues[order[k]] - eigenvalues[k]).abs() <= tol
    }));
    out
}

/// `40 / |lambda_plus|`: long enough for the slow bright mode to decay to
/// `e^-40` of its initial weight.
pub fn default_horizon(params: &SystemParams) -> Result<f64> {
    let lp = derive_effective_rates(params).lambda_plus;
    if lp.is_nan() || lp >= 0.0 {
        return Err(Error::UnsupportedRegime {
            operation: "default_horizon",
            reason: "no decaying bright mode (a coupling vanishes)".into(),
        });
    }
    Ok(40.0 / lp.abs())
}

/// Exact reduced-dynamics `(Q, A, B)` at time `t` for the QD initially excited.
/// Accepts `t = f64::INFINITY`.
pub fn reduced_propagate(params: &SystemParams, t: f64) -> Result<EmitterAmplitudes> {
    params.require_ideal("reduced_propagate")?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            value: t,
            reason: "must be non-negative",
        });
    }
    Ok(ReducedGenerator::new(params).propagate(EmitterAmplitudes::new(1.0, 0.0, 0.0), t))
}

/// Two-exponential emitter closed form (audit only).
///
/// Both terms decay, so this tends to zero even when the dark-state overlap
/// is finite; it therefore disagrees with [`reduced_propagate`] at large `t`.
/// The subtracted rate in the second coefficient is taken to be `Gamma_q`.
pub fn decaying_closed_form_qab(params: &SystemParams, t: f64) -> Result<EmitterAmplitudes> {
    params.require_ideal("decaying_closed_form_qab")?;
    let r = derive_effective_rates(params);
    if r.splitting == 0.0 {
        return Err(Error::UnsupportedRegime {
            operation: "decaying_closed_form_qab",
            reason: "degenerate eigenvalues (zero splitting)".into(),
        });
    }
    let ep = (r.lambda_plus * t).exp();
    let em = (r.lambda_minus * t).exp();
    let skew = (r.cavity_decay_a + r.cavity_decay_b - r.cavity_decay_q) / r.splitting;
    let r2 = r.splitting * r.splitting;
    Ok(EmitterAmplitudes::new(
        0.5 * (1.0 + skew) * ep + 0.5 * (1.0 - skew) * em,
        (r.cavity_decay_a * r.cavity_decay_q / (2.0 * r2)).sqrt() * (em - ep),
        (r.cavity_decay_b * r.cavity_decay_q / (2.0 * r2)).sqrt() * (em - ep),
    ))
}

/// Weights of `exp(lambda_plus t)` and `exp(lambda_minus t)` in the cavity
/// amplitudes, `alpha = -i g_q/(2 kappa) (c[0] e^{l+ t} + c[1] e^{l- t})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityCoefficients {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
}

/// Evaluated without the cancellation in `1 -/+ u/s` when `|u| ~ s`.
pub fn cavity_coefficients(params: &SystemParams) -> CavityCoefficients {
    let x = params.g_a() * params.g_a() - params.g_b() * params.g_b();
    let y = params.g_q() * params.g_q();
    let s = x.hypot(2.0 * y);
    if s == 0.0 {
        // g_q = 0 and g_a = g_b: the prefactor g_q vanishes anyway.
        return CavityCoefficients {
            alpha: [1.0, 1.0],
            beta: [1.0, 1.0],
        };
    }
    let xy4 = 4.0 * x * y;

    let u = x + 2.0 * y;
    let a1 = if u > 0.0 {
        -xy4 / (s * (s + u))
    } else {
        1.0 - u / s
    };
    let a2 = if u < 0.0 {
        -xy4 / (s * (s - u))
    } else {
        1.0 + u / s
    };

    let u = x - 2.0 * y;
    let b1 = if u < 0.0 {
        xy4 / (s * (s - u))
    } else {
        1.0 + u / s
    };
    let b2 = if u > 0.0 {
        xy4 / (s * (s + u))
    } else {
        1.0 - u / s
    };

    CavityCoefficients {
        alpha: [a1, a2],
        beta: [b1, b2],
    }
}

/// Cavity amplitudes `(alpha, beta)` in the adiabatic limit.
pub fn closed_form_cavity(params: &SystemParams, t: f64) -> Result<(Complex64, Complex64)> {
    params.require_ideal("closed_form_cavity")?;
    let r = derive_effective_rates(params);
    let c = cavity_coefficients(params);
    let ep = (r.lambda_plus * t).exp();
    let em = (r.lambda_minus * t).exp();
    let pre = -I * (params.g_q() / (2.0 * params.kappa()));
    Ok((
        pre * (c.alpha[0] * ep + c.alpha[1] * em),
        pre * (c.beta[0] * ep + c.beta[1] * em),
    ))
}

/// Cavity amplitudes slaved to the emitters, `alpha = -i (g_q Q + g_a A)/kappa`.
pub fn slaved_cavity(params: &SystemParams, e: &EmitterAmplitudes) -> (Complex64, Complex64) {
    let k = params.kappa();
    (
        -I * ((params.g_q() * e.q + params.g_a() * e.a) / k),
        -I * ((params.g_q() * e.q + params.g_b() * e.b) / k),
    )
}
