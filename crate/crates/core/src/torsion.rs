//! Element orders, and certificates of infinite order.
//!
//! A certificate for `g` records `k`, the order of the root rotation of `g`,
//! a first-level vertex `v` and `1 ≤ j < k` with `(g^k)_v = g^j`. If `g` had
//! finite order `n`, then `k | n` and `1 = (g^n)_v = ((g^k)_v)^{n/k} = g^{jn/k}`,
//! so `n` would divide `jn/k < n`.

use serde::Serialize;

use crate::tree_group::{act, equal, identity_key, key, section, NormalWord, Rot, Vertex};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub k: u64,
    #[serde(serialize_with = "vertex_str")]
    pub vertex: Vertex,
    pub j: u64,
}

fn vertex_str<S: serde::Serializer>(v: &Vertex, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrderResult {
    Finite { order: u64 },
    ExceedsBound { bound: u64 },
    Infinite { certificate: Certificate },
}

/// Powers `w, w², …, w^kmax` are compared with the identity by canonical key.
/// Without a finite order, a certificate is attempted.
pub fn order(w: &NormalWord, kmax: u64) -> OrderResult {
    let id = identity_key();
    let mut p = NormalWord::identity();
    for d in 1..=kmax.max(1) {
        p = p.multiply(w);
        if key(&p) == id {
            return OrderResult::Finite { order: d };
        }
    }
    match infinite_order_certificate(w) {
        Some(certificate) => OrderResult::Infinite { certificate },
        None => OrderResult::ExceedsBound { bound: kmax },
    }
}

/// Searches the first-level sections of `w^k`, `k` being the order of the
/// root rotation. `None` proves nothing.
pub fn infinite_order_certificate(w: &NormalWord) -> Option<Certificate> {
    let k = w.tail().order();
    let wk = w.pow(k);
    for x in Rot::ALL {
        let v = Vertex(vec![x]);
        let s = section(&wk, &v);
        for j in 1..k {
            if equal(&s, &w.pow(j)) {
                let cert = Certificate { k, vertex: v, j };
                return verify_certificate(w, &cert).then_some(cert);
            }
        }
    }
    None
}

/// Recomputes the three facts of a certificate from scratch.
pub fn verify_certificate(w: &NormalWord, cert: &Certificate) -> bool {
    if cert.k != w.tail().order() || cert.j == 0 || cert.j >= cert.k || cert.vertex.depth() != 1 {
        return false;
    }
    let wk = w.pow(cert.k);
    let fixes_level = Rot::ALL.iter().all(|&x| {
        let v = Vertex(vec![x]);
        act(&wk, &v) == v
    });
    fixes_level && equal(&section(&wk, &cert.vertex), &w.pow(cert.j))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at() -> NormalWord {
        NormalWord::parse("at").unwrap()
    }

    #[test]
    fn generator_orders() {
        assert_eq!(
            order(&NormalWord::a_power(Rot::ONE), 10),
            OrderResult::Finite { order: 3 }
        );
        assert_eq!(
            order(&NormalWord::t(), 10),
            OrderResult::Finite { order: 3 }
        );
        assert_eq!(
            order(&NormalWord::identity(), 10),
            OrderResult::Finite { order: 1 }
        );
        assert_eq!(infinite_order_certificate(&NormalWord::t()), None);
    }

    #[test]
    fn at_certificate() {
        let cert = infinite_order_certificate(&at()).expect("certificate");
        assert_eq!(cert.k, 3);
        assert_eq!(cert.j, 1);
        // (at)^3 = <ta, ta, at>
        assert_eq!(cert.vertex, Vertex(vec![Rot::TWO]));
        assert!(verify_certificate(&at(), &cert));
        assert!(matches!(order(&at(), 20), OrderResult::Infinite { .. }));
    }

    #[test]
    fn inverse_of_at_certified() {
        let inv = at().inverse();
        let cert = infinite_order_certificate(&inv).expect("certificate");
        assert!(verify_certificate(&inv, &cert));
    }

    #[test]
    fn forged_certificates_rejected() {
        let bad = Certificate {
            k: 3,
            vertex: Vertex(vec![Rot::ZERO]),
            j: 1,
        };
        assert!(!verify_certificate(&at(), &bad));
        let wrong_k = Certificate {
            k: 1,
            vertex: Vertex(vec![Rot::TWO]),
            j: 1,
        };
        assert!(!verify_certificate(&at(), &wrong_k));
        let t = NormalWord::t();
        for x in Rot::ALL {
            for j in 0..4 {
                let c = Certificate {
                    k: 1,
                    vertex: Vertex(vec![x]),
                    j,
                };
                assert!(!verify_certificate(&t, &c));
            }
        }
    }

    #[test]
    fn exceeds_bound_without_certificate() {
        // t0 t1 has trivial root rotation, so no certificate applies
        let w = NormalWord::from_pairs(&[(0, 1), (1, 1)], 0);
        match order(&w, 5) {
            OrderResult::Finite { order } => assert!(order <= 5),
            OrderResult::ExceedsBound { bound } => assert_eq!(bound, 5),
            OrderResult::Infinite { .. } => panic!("no certificate expected"),
        }
    }

    #[test]
    fn json_shape() {
        let r = order(&at(), 3);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["kind"], "infinite");
        assert_eq!(v["certificate"]["vertex"], "2");
    }
}
