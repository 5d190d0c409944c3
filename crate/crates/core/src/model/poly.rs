use std::fmt;

/// A real polynomial stored by ascending powers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds from ascending coefficients; trailing zeros are trimmed.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c * x^k`.
    pub fn monomial(c: f64, k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree of the polynomial; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    #[must_use]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    #[must_use]
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Self::new(coeffs)
    }

    /// Antiderivative vanishing at 0.
    #[must_use]
    pub fn integral(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k + 1) as f64));
        Self::new(coeffs)
    }

    pub fn add_term(&mut self, c: f64, k: usize) {
        if self.coeffs.len() <= k {
            self.coeffs.resize(k + 1, 0.0);
        }
        self.coeffs[k] += c;
        let trimmed = Self::new(std::mem::take(&mut self.coeffs));
        *self = trimmed;
    }

    #[must_use]
    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + rhs.coeffs.get(k).unwrap_or(&0.0))
            .collect();
        Polynomial::new(coeffs)
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}x")?,
                _ => write!(f, "{a}x^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_calculus() {
        let p = Polynomial::new(vec![1.0, -3.5, 3.0, -1.0]);
        assert_eq!(p.eval(2.0), 1.0 - 7.0 + 12.0 - 8.0);
        assert_eq!(p.derivative().coeffs(), &[-3.5, 6.0, -3.0]);
        assert_eq!(p.integral().derivative(), p);
        assert_eq!(p.degree(), Some(3));
    }

    #[test]
    fn cancellation_trims_degree() {
        let a = Polynomial::new(vec![0.0, 1.0, 1.0]);
        let b = Polynomial::monomial(1.0, 2);
        assert_eq!((&a - &b).degree(), Some(1));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn display_is_readable() {
        let p = Polynomial::new(vec![1.0, 0.0, -2.0]);
        assert_eq!(p.to_string(), "1 - 2x^2");
    }
}
