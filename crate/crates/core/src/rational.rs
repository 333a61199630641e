//! Exact rationals used for every density and threshold.

use num_rational::Ratio;

pub type Rational = Ratio<i64>;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn ratio(num: usize, den: usize) -> Rational {
    Rational::new(num as i64, den as i64)
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn format_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_ratio(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().ok()?;
            let d: i64 = d.trim().parse().ok()?;
            if d == 0 {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => s.parse::<i64>().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_and_parse() {
        let r = ratio(2, 4);
        assert_eq!(format_ratio(&r), "1/2");
        assert_eq!(parse_ratio("1/2"), Some(r));
        assert_eq!(parse_ratio("3"), Some(Rational::from_integer(3)));
        assert_eq!(format_ratio(&Rational::from_integer(0)), "0/1");
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(parse_ratio("x"), None);
    }
}
