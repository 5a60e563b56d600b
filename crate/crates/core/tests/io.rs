use std::io::Cursor;

use toral::io::*;
use toral::lattice::{distinct_spectrum, AspectRatio};
use toral::potentials::{cosine_potential, distorted_lattice, grid_positions};
use toral::solver::solve;

fn prov() -> Provenance {
    Provenance {
        config_sha256: "ab".repeat(32),
        seed: Some(7),
    }
}

fn lines(buf: Vec<u8>) -> Vec<String> {
    String::from_utf8(buf).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn spectrum_table_is_multiplicity_expanded() {
    let sq = AspectRatio::square();
    let out = lines(write_spectrum(Vec::new(), &prov(), &distinct_spectrum(100.0, sq)).unwrap());
    assert_eq!(out[0], format!("# config_sha256={} seed=7", "ab".repeat(32)));
    assert_eq!(out[1], "k,num,den,value_float,multiplicity");
    assert_eq!(out.len() - 2, 317);
    let distinct: std::collections::BTreeSet<&str> =
        out[2..].iter().map(|l| l.split(',').next().unwrap()).collect();
    let brute: std::collections::BTreeSet<i64> = (-10i64..=10)
        .flat_map(|m| (-10i64..=10).map(move |n| m * m + n * n))
        .filter(|&t| t <= 100)
        .collect();
    assert_eq!(brute.len(), 44);
    assert_eq!(distinct.len(), 44);
    let zero = lines(write_spectrum(Vec::new(), &prov(), &distinct_spectrum(0.0, sq)).unwrap());
    assert_eq!(zero.len(), 3);
    assert!(zero[2].starts_with("0,0,1,"));
    assert!(zero[2].ends_with(",1"));
}

#[test]
fn floats_round_trip_exactly() {
    for x in [0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-300, 6.02e23, -0.0, f64::MAX, f64::MIN_POSITIVE] {
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17);
    }
    assert_eq!(fmt_f64(f64::NAN), "NaN");
}

#[test]
fn json_uses_seventeen_digits() {
    #[derive(serde::Serialize)]
    struct Doc {
        x: f64,
        n: u32,
        s: &'static str,
        v: Vec<f64>,
        bad: f64,
    }
    let text = to_json(&Doc {
        x: 0.1,
        n: 3,
        s: "a\"b",
        v: vec![1.0, 2.5],
        bad: f64::INFINITY,
    })
    .unwrap();
    assert!(text.contains("\"x\": 1.0000000000000001e-1"));
    assert!(text.contains("\"n\": 3"));
    assert!(text.contains("\"bad\": null"));
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["x"].as_f64(), Some(0.1));
    assert_eq!(back["s"].as_str(), Some("a\"b"));
    assert_eq!(back["v"][1].as_f64(), Some(2.5));
}

#[test]
fn potential_document_lists_coefficients() {
    let v = cosine_potential(AspectRatio::square(), 0.25);
    let doc = PotentialDocument::new("trig", &v);
    let text = to_json(&doc).unwrap();
    let back: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(back["coefficients"].as_array().unwrap().len(), 2);
    assert_eq!(back["coefficients"][0]["re"].as_f64(), Some(0.25));
}

#[test]
fn eigenvector_dump_round_trip() {
    let pairs = solve(&cosine_potential(AspectRatio::square(), 0.5), 12.0).unwrap();
    let bytes = write_eigenvectors(Vec::new(), &pairs).unwrap();
    assert_eq!(bytes.len(), 16 + pairs.len() * pairs[0].psi.len() * 16);
    let back = read_eigenvectors(Cursor::new(bytes)).unwrap();
    assert_eq!(back.len(), pairs.len());
    for (p, v) in pairs.iter().zip(&back) {
        for (c, (re, im)) in p.psi.iter().zip(v) {
            assert_eq!((c.re.to_bits(), c.im.to_bits()), (re.to_bits(), im.to_bits()));
        }
    }
    assert_eq!(basis_listing(&pairs).len(), pairs[0].psi.len());
}

#[test]
fn positions_round_trip() {
    let sq = AspectRatio::square();
    let base = grid_positions(4, sq);
    let pts = distorted_lattice(16, 0.3, 5, sq).unwrap();
    let bytes = write_positions(Vec::new(), &prov(), &pts, &base).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.lines().nth(1).unwrap() == "j,omega_x,omega_y,base_x,base_y");
    assert_eq!(read_positions(Cursor::new(bytes)).unwrap(), pts);
}

#[test]
fn seedless_comment() {
    let p = Provenance {
        config_sha256: "00".into(),
        seed: None,
    };
    assert_eq!(p.comment_line(), "# config_sha256=00 seed=none");
}
