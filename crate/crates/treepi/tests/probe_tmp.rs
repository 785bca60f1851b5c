use treepi_core::audit::{verify_inverse, InverseKind};
use treepi_core::encode::{Encoding, ALL_ENCODINGS};
use treepi_core::equiv::Bounds;
use treepi_core::lambda::parse_lambda;

#[test]
fn probe_inverse_matrix() {
    let b = Bounds::default();
    let id = parse_lambda("\\z. z").unwrap();
    let xv = parse_lambda("x").unwrap();
    for e in ALL_ENCODINGS {
        for fill in [&xv, &id] {
            let v = verify_inverse(e, InverseKind::Abstraction, &[fill.clone()], &b).unwrap();
            println!("{e:?} abs fill={fill}: {:?}", v.kind());
        }
        for (i, n, fills) in [
            (1usize, 1usize, vec![id.clone()]),
            (1, 1, vec![xv.clone()]),
            (1, 2, vec![id.clone(), xv.clone()]),
            (2, 2, vec![xv.clone(), id.clone()]),
        ] {
            let v = verify_inverse(e, InverseKind::Variable { i, n }, &fills, &b).unwrap();
            println!("{e:?} var i={i} n={n}: {:?}", v.kind());
        }
    }
    let _ = Encoding::MilnerCBN;
}
