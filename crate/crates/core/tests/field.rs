use std::io::Cursor;

use nalgebra::{DMatrix, Matrix4, Vector4};
use swlab::calculus::{l2_inner, partial_derivative};
use swlab::field::{pairwise_sum, write_matrix, Field, Grid};
use swlab::sample::{rng, rough, smooth_metric};
use swlab::{Error, C64};

fn round_trip<V: swlab::field::Value + PartialEq + std::fmt::Debug>(f: &Field<V>) -> (String, Field<V>) {
    let mut buf = Vec::new();
    f.write_to(&mut buf).unwrap();
    let nl = buf.iter().position(|&b| b == b'\n').unwrap();
    let header = String::from_utf8(buf[..nl].to_vec()).unwrap();
    (header, Field::read_from(Cursor::new(buf)).unwrap())
}

#[test]
fn container_round_trips() {
    let gr = Grid::new(4).unwrap();
    let mut r = rng(81);
    let s: Field<f64> = rough(&mut r, gr);
    let (h, back) = round_trip(&s);
    assert_eq!(h, r#"{"dims":[4,4,4,4],"components":1,"dtype":"f64"}"#);
    assert_eq!(back, s);

    let psi: Field<Vector4<C64>> = rough(&mut r, gr);
    let (h, back) = round_trip(&psi);
    assert_eq!(h, r#"{"dims":[4,4,4,4],"components":4,"dtype":"c128"}"#);
    assert_eq!(back, psi);

    let m: Field<Matrix4<f64>> = rough(&mut r, gr);
    assert_eq!(round_trip(&m).1, m);
}

#[test]
fn container_payload_is_row_major_little_endian() {
    let gr = Grid::new(4).unwrap();
    let f = Field::from_fn(gr, |i| [i as f64, -(i as f64)]);
    let mut buf = Vec::new();
    f.write_to(&mut buf).unwrap();
    let nl = buf.iter().position(|&b| b == b'\n').unwrap();
    let body = &buf[nl + 1..];
    assert_eq!(body.len(), 256 * 2 * 8);
    let at = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().unwrap());
    assert_eq!((at(2), at(3)), (1.0, -1.0));
    assert_eq!(at(2 * gr.index([1, 0, 0, 0])), 64.0);
}

#[test]
fn container_rejects_mismatches() {
    let gr = Grid::new(4).unwrap();
    let mut buf = Vec::new();
    Field::constant(gr, [1.0; 4]).write_to(&mut buf).unwrap();
    assert!(matches!(Field::<[f64; 6]>::read_from(Cursor::new(buf.clone())), Err(Error::Format(_))));
    assert!(matches!(Field::<Vector4<C64>>::read_from(Cursor::new(buf.clone())), Err(Error::Format(_))));
    buf.truncate(buf.len() - 3);
    assert!(matches!(Field::<[f64; 4]>::read_from(Cursor::new(buf)), Err(Error::Io(_))));
    let odd = br#"{"dims":[4,4,4,6],"components":1,"dtype":"f64"}"#.to_vec();
    assert!(matches!(Field::<f64>::read_from(Cursor::new(odd)), Err(Error::Format(_))));
}

#[test]
fn matrix_export_layout() {
    let m = DMatrix::from_fn(2, 3, |i, j| (10 * i + j) as f64);
    let mut buf = Vec::new();
    write_matrix(&m, &mut buf).unwrap();
    let nl = buf.iter().position(|&b| b == b'\n').unwrap();
    let header: serde_json::Value = serde_json::from_slice(&buf[..nl]).unwrap();
    assert_eq!(header["dims"], serde_json::json!([2, 3]));
    let vals: Vec<f64> = buf[nl + 1..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    assert_eq!(vals, vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
}

#[test]
fn pairwise_sum_matches_naive_sum() {
    let x: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
    let naive: f64 = x.iter().sum();
    assert!((pairwise_sum(&x) - naive).abs() <= 1e-12);
    assert_eq!(pairwise_sum(&[]), 0.0);
}

#[test]
fn reductions_do_not_depend_on_thread_count() {
    let gr = Grid::new(8).unwrap();
    let mut r = rng(82);
    let g = smooth_metric(&mut r, gr, 0.1);
    let a: Field<[f64; 4]> = rough(&mut r, gr);
    let b: Field<[f64; 4]> = rough(&mut r, gr);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let d = partial_derivative(&a, 2);
            (l2_inner(&d, &b, &g).unwrap().to_bits(), d.flat_norm().to_bits())
        })
    };
    assert_eq!(run(1), run(4));
}
