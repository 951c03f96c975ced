//! Bessel and Hankel values against a high-precision reference table.

use kglab::specfun::{bessel_j, bessel_y0, bessel_y1, hankel_h1_plus};
use num_complex::Complex64;

fn rows() -> Vec<(String, u32, f64, f64, Complex64)> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/bessel.csv");
    let text = std::fs::read_to_string(path).expect("fixture");
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let p = |i: usize| f[i].parse::<f64>().unwrap();
            (f[0].to_string(), f[1].parse().unwrap(), p(2), p(3), Complex64::new(p(4), p(5)))
        })
        .collect()
}

#[test]
fn real_order_values() {
    let mut worst = 0.0f64;
    for (kind, n, x, _, want) in rows() {
        let got = match kind.as_str() {
            "J" => bessel_j(n, x),
            "Y" if n == 0 => bessel_y0(x),
            "Y" => bessel_y1(x),
            _ => continue,
        };
        // near zeros the absolute error is what carries meaning
        let err = (got - want.re).abs() / want.re.abs().max(1e-3);
        worst = worst.max(err);
        assert!(err < 1e-10, "{kind}_{n}({x}) = {got:e}, reference {:e}", want.re);
    }
    assert!(worst > 0.0);
}

#[test]
fn hankel_complex_values() {
    let mut seen = 0;
    for (kind, _, x, y, want) in rows() {
        if kind != "H1" {
            continue;
        }
        let got = hankel_h1_plus(Complex64::new(x, y)).unwrap();
        let err = (got - want).norm() / want.norm();
        assert!(err < 1e-10, "H1({x}+{y}i) = {got}, reference {want}, rel {err:e}");
        seen += 1;
    }
    assert_eq!(seen, 10);
}
