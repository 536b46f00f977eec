use super::fixed::FixedReal;

/// Compensated complex accumulator (Kahan–Babuška/Neumaier per component).
///
/// Reductions are deterministic for a fixed term order; partial sums are
/// combined with [`ComplexSum::merge`] in a fixed order by the callers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ComplexSum {
    pub re: f64,
    pub im: f64,
    pub terms: u64,
    pub comp_re: f64,
    pub comp_im: f64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_value(re: f64, im: f64) -> Self {
        ComplexSum {
            re,
            im,
            terms: 1,
            ..Default::default()
        }
    }

    #[inline]
    pub fn add(&mut self, re: f64, im: f64) {
        neumaier(&mut self.re, &mut self.comp_re, re);
        neumaier(&mut self.im, &mut self.comp_im, im);
        self.terms += 1;
    }

    /// Add `w · (re + i im)` for a real weight `w`.
    #[inline]
    pub fn add_scaled(&mut self, w: f64, (re, im): (f64, f64)) {
        self.add(w * re, w * im);
    }

    /// Fold another partial sum into this one, compensation included.
    pub fn merge(&mut self, other: &ComplexSum) {
        neumaier(&mut self.re, &mut self.comp_re, other.re);
        neumaier(&mut self.re, &mut self.comp_re, other.comp_re);
        neumaier(&mut self.im, &mut self.comp_im, other.im);
        neumaier(&mut self.im, &mut self.comp_im, other.comp_im);
        self.terms += other.terms;
    }

    /// Merge a sequence of partial sums left to right.
    pub fn merge_all<'a>(parts: impl IntoIterator<Item = &'a ComplexSum>) -> ComplexSum {
        let mut acc = ComplexSum::new();
        for p in parts {
            acc.merge(p);
        }
        acc
    }

    pub fn negated(&self) -> ComplexSum {
        ComplexSum {
            re: -self.re,
            im: -self.im,
            terms: self.terms,
            comp_re: -self.comp_re,
            comp_im: -self.comp_im,
        }
    }

    /// Compensated value.
    pub fn value(&self) -> (f64, f64) {
        (self.re + self.comp_re, self.im + self.comp_im)
    }

    pub fn abs(&self) -> f64 {
        let (r, i) = self.value();
        r.hypot(i)
    }
}

/// Functional form of [`ComplexSum::add`].
pub fn kahan_add(mut acc: ComplexSum, term: (f64, f64)) -> ComplexSum {
    acc.add(term.0, term.1);
    acc
}

/// `e(x) = (cos 2πx, sin 2πx)` for a fixed-point argument.
///
/// The argument is reduced mod 1 exactly on the mantissa before any float
/// rounding, so large arguments lose nothing.
pub fn unit_exp(x: &FixedReal) -> (f64, f64) {
    x.to_phase().unit_exp()
}
