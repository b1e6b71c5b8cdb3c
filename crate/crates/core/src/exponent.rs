//! Exact complex-rational exponents `z = re + i·im`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Q = Rational64;

/// Parse `"p/q"`, `"p"` or a decimal literal like `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Q, Error> {
    let s = s.trim();
    if let Ok(q) = Q::from_str(s) {
        return Ok(q);
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.chars().all(|c| c.is_ascii_digit()) && frac.len() <= 15 {
            let neg = int.starts_with('-');
            let int_part: i64 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse()
                    .map_err(|_| Error::Parse(format!("bad rational `{s}`")))?
            };
            let den = 10i64.pow(frac.len() as u32);
            let num: i64 = if frac.is_empty() {
                0
            } else {
                frac.parse().unwrap()
            };
            let mag = Q::from_integer(int_part.abs()) + Q::new(num, den);
            return Ok(if neg { -mag } else { mag });
        }
    }
    Err(Error::Parse(format!("bad rational `{s}`")))
}

pub fn format_rational(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exact complex rational. Ordered lexicographically by `(re, im)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Exponent {
    pub re: Q,
    pub im: Q,
}

impl Exponent {
    pub fn new(re: Q, im: Q) -> Self {
        Exponent { re, im }
    }

    pub fn real(re: Q) -> Self {
        Exponent { re, im: Q::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::real(Q::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::real(Q::new(n, d))
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// `Some(k)` when `self - other` is the integer `k`.
    pub fn integer_offset(&self, other: &Exponent) -> Option<i64> {
        if self.im != other.im {
            return None;
        }
        let d = self.re - other.re;
        d.is_integer().then(|| d.to_integer())
    }

    pub fn scale(&self, k: Q) -> Self {
        Exponent {
            re: self.re * k,
            im: self.im * k,
        }
    }

    pub fn conj(&self) -> Self {
        Exponent {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn norm_sqr(&self) -> Q {
        self.re * self.re + self.im * self.im
    }

    pub fn recip(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Exponent {
            re: self.re / n,
            im: -self.im / n,
        })
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    /// Closest rational approximation of a floating point complex number.
    pub fn approximate(z: Complex64) -> Self {
        Exponent {
            re: approx_q(z.re),
            im: approx_q(z.im),
        }
    }
}

fn approx_q(x: f64) -> Q {
    if x.abs() < 1e-14 {
        return Q::zero();
    }
    // Continued fraction with a 1e-13 relative stop keeps denominators small.
    let mut h = (1i128, 0i128);
    let mut k = (0i128, 1i128);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let hn = ai * h.0 + h.1;
        let kn = ai * k.0 + k.1;
        if hn.abs() > i64::MAX as i128 / 4 || kn.abs() > i64::MAX as i128 / 4 {
            break;
        }
        h = (hn, h.0);
        k = (kn, k.0);
        let approx = hn as f64 / kn as f64;
        if (approx - x).abs() <= 1e-13 * x.abs().max(1.0) {
            break;
        }
        let frac = r - a;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    Q::new(h.0 as i64, k.0 as i64)
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then(self.im.cmp(&other.im))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, o: Exponent) -> Exponent {
        Exponent {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Exponent {
    type Output = Exponent;
    fn sub(self, o: Exponent) -> Exponent {
        Exponent {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for Exponent {
    type Output = Exponent;
    fn mul(self, o: Exponent) -> Exponent {
        Exponent {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Div for Exponent {
    type Output = Exponent;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Exponent) -> Exponent {
        self * o.recip().expect("division by zero exponent")
    }
}

impl Zero for Exponent {
    fn zero() -> Self {
        Exponent::default()
    }
    fn is_zero(&self) -> bool {
        Exponent::is_zero(self)
    }
}

impl One for Exponent {
    fn one() -> Self {
        Exponent::int(1)
    }
}

impl From<i64> for Exponent {
    fn from(n: i64) -> Self {
        Exponent::int(n)
    }
}

impl From<Q> for Exponent {
    fn from(q: Q) -> Self {
        Exponent::real(q)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", format_rational(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}i", format_rational(&self.im))
        } else {
            let sign = if self.im.is_negative() { '-' } else { '+' };
            write!(
                f,
                "{}{}{}i",
                format_rational(&self.re),
                sign,
                format_rational(&self.im.abs())
            )
        }
    }
}
