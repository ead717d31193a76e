#![allow(dead_code)]

use fpme::{Field, GridSpec};
use rand::Rng;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = two_sum(s, e);
        Dd { hi, lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + self.hi * o.lo + self.lo * o.hi;
        let (hi, lo) = two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn sub(self, o: Dd) -> Dd {
        self.add(Dd {
            hi: -o.hi,
            lo: -o.lo,
        })
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Lanczos approximation (g = 7, 9 terms), with reflection below 1/2.
pub fn lanczos_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * lanczos_gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + G + 0.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Half the singular-integral constant of `(-Delta)^r`, written through
/// `|Gamma(-r)| = Gamma(1-r)/r`.
pub fn half_frac_constant(dim: usize, r: f64) -> f64 {
    let n = dim as f64;
    0.5 * 4f64.powf(r) * r * lanczos_gamma(n / 2.0 + r)
        / (std::f64::consts::PI.powf(n / 2.0) * lanczos_gamma(1.0 - r))
}

fn min_image(d: i64, n: i64) -> i64 {
    let m = d.rem_euclid(n);
    if m >= n / 2 {
        m - n
    } else {
        m
    }
}

/// Double-double evaluation of the difference form over ordered pairs.
pub fn difference_form_oracle(v: &Field, w: &Field, r: f64) -> f64 {
    let g = v.grid();
    let (n, dim) = (g.n() as i64, g.dim());
    let dx = g.dx();
    let idx = |flat: usize| -> [i64; 2] {
        if dim == 1 {
            [flat as i64, 0]
        } else {
            [(flat / g.n()) as i64, (flat % g.n()) as i64]
        }
    };
    let expo = -(dim as f64 + 2.0 * r);
    let (vv, ww) = (v.values(), w.values());
    let mut total = Dd::default();
    for i in 0..g.len() {
        let a = idx(i);
        for j in 0..g.len() {
            if i == j {
                continue;
            }
            let b = idx(j);
            let rho2: f64 = (0..dim)
                .map(|ax| {
                    let d = min_image(b[ax] - a[ax], n) as f64 * dx;
                    d * d
                })
                .sum();
            let k = Dd::from(rho2.sqrt().powf(expo));
            let dv = Dd::from(vv[i]).sub(Dd::from(vv[j]));
            let dw = Dd::from(ww[i]).sub(Dd::from(ww[j]));
            total = total.add(dv.mul(dw).mul(k));
        }
    }
    let cell = dx.powi(dim as i32);
    total
        .mul(Dd::from(cell * cell))
        .mul(Dd::from(half_frac_constant(dim, r)))
        .to_f64()
}

pub fn random_field<R: Rng>(grid: GridSpec, rng: &mut R, lo: f64, hi: f64) -> Field {
    Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

pub fn gaussian(grid: GridSpec, center: &[f64], width: f64, mass: f64) -> Field {
    let f = Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
        (-r2 / (2.0 * width * width)).exp()
    })
    .unwrap();
    let m = fpme::integrate(&f);
    f.scale(mass / m)
}

/// Smooth bump supported in `|x - center| < radius`.
pub fn bump(grid: GridSpec, center: &[f64], radius: f64) -> Field {
    Field::from_fn(grid, |x| {
        let r2: f64 = x
            .iter()
            .zip(center)
            .map(|(a, b)| ((a - b) / radius).powi(2))
            .sum();
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    })
    .unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
