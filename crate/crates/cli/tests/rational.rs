use num_bigint::BigInt;
use num_rational::BigRational;
use prequant_cli::config::SceneConfig;
use prequant_cli::rational::{format_rational, parse_rational};
use proptest::prelude::*;

proptest! {
    #[test]
    fn format_then_parse_is_identity(n in any::<i64>(), d in 1i64..=i64::MAX) {
        let q = BigRational::new(n.into(), d.into());
        prop_assert_eq!(parse_rational(&format_rational(&q)).unwrap(), q);
    }

    #[test]
    fn decimals_are_exact(whole in 0u32..100_000, frac in 0u32..1000, exp in -20i32..20) {
        let text = format!("{whole}.{frac:03}e{exp}");
        let mut expected = BigRational::new(BigInt::from(whole) * 1000 + frac, BigInt::from(1000));
        let ten = BigRational::from_integer(10.into());
        for _ in 0..exp.unsigned_abs() {
            expected = if exp > 0 { expected * &ten } else { expected / &ten };
        }
        prop_assert_eq!(parse_rational(&text).unwrap(), expected);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,40}") {
        let _ = parse_rational(&s);
        let _ = SceneConfig::parse(&s);
    }

    #[test]
    fn config_like_text_never_panics(s in "[\\[\\]a-z_=\"0-9./ \n-]{0,80}") {
        let _ = SceneConfig::parse(&s);
    }
}
