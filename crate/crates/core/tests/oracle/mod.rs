//! Independent reference implementations used to check the library: the
//! pulse shapes, the counter-diabatic coupling, and the coherent dynamics on
//! the eight states reachable under the reference + auxiliary drive, written
//! out by hand and integrated with a plain fixed-step RK4.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub const G: f64 = 1.0;

/// Order of the hand-built basis.
pub const PHI1: usize = 0;
pub const PHI2: usize = 1;
pub const PHI3: usize = 2;
pub const PHI4: usize = 3;
pub const PHI5: usize = 4;
pub const EF: usize = 5;
pub const FFB: usize = 6;
pub const FE: usize = 7;
pub const DIM: usize = 8;

#[derive(Clone, Copy, Debug)]
pub enum Pulses {
    Transfer { omega0: f64, t: f64, tau: f64 },
    Entangle { omega0: f64, t: f64, theta: f64, w: f64 },
}

impl Pulses {
    pub fn transfer(omega0: f64, t: f64) -> Self {
        Pulses::Transfer { omega0, t, tau: 0.22 * t }
    }

    pub fn entangle(omega0: f64, t: f64) -> Self {
        Pulses::Entangle {
            omega0,
            t,
            theta: 17.0 / 120.0,
            w: 23.0 / 120.0,
        }
    }

    pub fn window(&self) -> (f64, f64) {
        match *self {
            Pulses::Transfer { t, tau, .. } => (0.0, t + tau),
            Pulses::Entangle { t, .. } => (0.0, t),
        }
    }

    /// (Ω₁, Ω₂)
    pub fn omegas(&self, x: f64) -> (f64, f64) {
        match *self {
            Pulses::Transfer { omega0, t, tau } => {
                let bump = |s: f64| {
                    if (0.0..=t).contains(&s) {
                        omega0 * (std::f64::consts::PI * s / t).sin().powi(4)
                    } else {
                        0.0
                    }
                };
                (bump(x - tau), bump(x))
            }
            Pulses::Entangle { omega0, t, theta, w } => {
                let gauss = |c: f64| (-((x - c) / (w * t)).powi(2)).exp();
                let late = gauss((theta + 0.5) * t);
                let early = gauss((0.5 - theta) * t);
                (0.5 * omega0 * late, omega0 * (early + 0.5 * late))
            }
        }
    }

    /// (Ω₁′, Ω₂′) by a fine central difference.
    pub fn derivatives(&self, x: f64) -> (f64, f64) {
        let h = 1e-6;
        let (a1, a2) = self.omegas(x + h);
        let (b1, b2) = self.omegas(x - h);
        ((a1 - b1) / (2.0 * h), (a2 - b2) / (2.0 * h))
    }

    /// C = (Ω₁Ω₂′ − Ω₂Ω₁′) / (Ω₁² + Ω₂² + Ω₁²Ω₂²/g²)
    pub fn cdd(&self, x: f64) -> f64 {
        let (o1, o2) = self.omegas(x);
        let (d1, d2) = self.derivatives(x);
        let den = o1 * o1 + o2 * o2 + o1 * o1 * o2 * o2 / (G * G);
        if den < 1e-18 {
            0.0
        } else {
            (o1 * d2 - o2 * d1) / den
        }
    }

    /// Composite Simpson integral of C over the window.
    pub fn cdd_area(&self, intervals: usize) -> f64 {
        let (a, b) = self.window();
        let n = intervals + intervals % 2;
        let h = (b - a) / n as f64;
        let mut s = self.cdd(a) + self.cdd(b);
        for k in 1..n {
            s += self.cdd(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }
}

/// Auxiliary Rabi frequency matched to C with the given detunings.
pub fn aux_rabi(p: &Pulses, x: f64, d1: f64, d2: f64) -> f64 {
    let (o1, o2) = p.omegas(x);
    let (dd1, dd2) = p.derivatives(x);
    let den = (o1 * o1 + o2 * o2) * G * G + o1 * o1 * o2 * o2;
    if den < 1e-18 {
        return 0.0;
    }
    let rad = (o1 * dd2 - o2 * dd1) * (d1 - d2) / den;
    2.0 * d1 * d2 / (d1 + d2) * rad.max(0.0).sqrt()
}

/// H₀ + H̃ on the eight-state basis above.
pub fn h_aux(p: &Pulses, x: f64, d1: f64, d2: f64) -> [[C; DIM]; DIM] {
    let mut h = [[C::new(0.0, 0.0); DIM]; DIM];
    let (o1, o2) = p.omegas(x);
    let mut set = |r: usize, c: usize, v: C| {
        h[r][c] += v;
        h[c][r] += v.conj();
    };
    set(PHI2, PHI1, C::new(o1, 0.0));
    set(PHI4, PHI5, C::new(0.0, -o2));
    set(PHI2, PHI3, C::new(G, 0.0));
    set(PHI4, PHI3, C::new(G, 0.0));
    let om = aux_rabi(p, x, d1, d2);
    let lower = C::from_polar(om, -d1 * x);
    set(EF, PHI1, lower);
    set(FE, PHI5, lower);
    let cav = C::from_polar(G, d2 * x);
    set(FFB, EF, cav);
    set(FFB, FE, cav);
    h
}

fn deriv(h: &[[C; DIM]; DIM], y: &[C; DIM]) -> [C; DIM] {
    let mut out = [C::new(0.0, 0.0); DIM];
    for r in 0..DIM {
        let mut s = C::new(0.0, 0.0);
        for c in 0..DIM {
            s += h[r][c] * y[c];
        }
        out[r] = C::new(0.0, -1.0) * s;
    }
    out
}

fn axpy(y: &[C; DIM], k: &[C; DIM], a: f64) -> [C; DIM] {
    let mut out = *y;
    for i in 0..DIM {
        out[i] += k[i] * a;
    }
    out
}

/// Fixed-step RK4 from |φ₁⟩ over the window; returns the final amplitudes.
pub fn evolve_aux(p: &Pulses, d1: f64, d2: f64, step: f64) -> [C; DIM] {
    let (a, b) = p.window();
    let n = ((b - a) / step).ceil() as usize;
    let h = (b - a) / n as f64;
    let mut y = [C::new(0.0, 0.0); DIM];
    y[PHI1] = C::new(1.0, 0.0);
    for k in 0..n {
        let t = a + k as f64 * h;
        let k1 = deriv(&h_aux(p, t, d1, d2), &y);
        let k2 = deriv(&h_aux(p, t + 0.5 * h, d1, d2), &axpy(&y, &k1, 0.5 * h));
        let k3 = deriv(&h_aux(p, t + 0.5 * h, d1, d2), &axpy(&y, &k2, 0.5 * h));
        let k4 = deriv(&h_aux(p, t + h, d1, d2), &axpy(&y, &k3, h));
        for i in 0..DIM {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    y
}

/// |⟨(−iφ₁ + φ₅)/√2 | ψ⟩|²
pub fn bell_fidelity(y: &[C; DIM]) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amp = C::new(0.0, -s).conj() * y[PHI1] + y[PHI5] * s;
    amp.norm_sqr()
}

/// Dark state of H₀ in (φ₁ … φ₅): ∝ (Ω₂, 0, −Ω₁Ω₂/g, 0, iΩ₁).
pub fn dark_state(p: &Pulses, x: f64) -> [C; 5] {
    let (o1, o2) = p.omegas(x);
    let v = [
        C::new(o2, 0.0),
        C::new(0.0, 0.0),
        C::new(-o1 * o2 / G, 0.0),
        C::new(0.0, 0.0),
        C::new(0.0, o1),
    ];
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

/// Reachability by repeated sparse matrix–vector closure: a state joins
/// the set when any generator maps a member onto it.
pub fn closure(generators: &[Vec<Vec<C>>], seed: usize) -> Vec<usize> {
    let n = generators[0].len();
    let mut inside = vec![false; n];
    inside[seed] = true;
    let mut changed = true;
    while changed {
        changed = false;
        for m in generators {
            for c in 0..n {
                if !inside[c] {
                    continue;
                }
                for r in 0..n {
                    if !inside[r] && m[r][c].norm() > 1e-12 {
                        inside[r] = true;
                        changed = true;
                    }
                }
            }
        }
    }
    (0..n).filter(|&i| inside[i]).collect()
}
