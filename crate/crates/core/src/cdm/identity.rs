use std::hash::Hasher;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

/// The cross-runtime stand-in for AST node identity.
///
/// Two nodes with equal identities come from the same method of the same
/// class, have the same type and cover the same (normalized) source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeIdentity {
    pub class_name: String,
    pub method_selector: String,
    pub node_type: String,
    pub source_text: String,
}

impl NodeIdentity {
    pub fn hash64(&self) -> u64 {
        identity_hash(self)
    }
}

const UNIT_SEPARATOR: &[u8] = &[0x1F];

/// FNV-1a 64 over `class 0x1F selector 0x1F nodeType 0x1F source`.
pub fn identity_hash(id: &NodeIdentity) -> u64 {
    identity_hash_parts(&id.class_name, &id.method_selector, &id.node_type, &id.source_text)
}

pub(crate) fn identity_hash_parts(class: &str, selector: &str, node_type: &str, source: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(class.as_bytes());
    h.write(UNIT_SEPARATOR);
    h.write(selector.as_bytes());
    h.write(UNIT_SEPARATOR);
    h.write(node_type.as_bytes());
    h.write(UNIT_SEPARATOR);
    h.write(source.as_bytes());
    h.finish()
}

pub fn identities_equal(a: &NodeIdentity, b: &NodeIdentity) -> bool {
    a == b
}

#[cfg(test)]
mod tests {
    use super::*;

    // Straight transcription of FNV-1a 64, kept independent of the `fnv` crate.
    fn reference_fnv1a(bytes: &[u8]) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        hash
    }

    fn id(c: &str, s: &str, t: &str, src: &str) -> NodeIdentity {
        NodeIdentity {
            class_name: c.into(),
            method_selector: s.into(),
            node_type: t.into(),
            source_text: src.into(),
        }
    }

    #[test]
    fn empty_identity_hashes_three_separators() {
        let expected = reference_fnv1a(&[0x1F, 0x1F, 0x1F]);
        assert_eq!(identity_hash(&id("", "", "", "")), expected);
        assert_eq!(expected, 0x8f3e_7418_d31f_e7b4);
    }

    #[test]
    fn matches_reference_on_a_quadruple() {
        let q = id("PCBConfig", "mySetting:", "Send", "@mySetting = v");
        let bytes = b"PCBConfig\x1FmySetting:\x1FSend\x1F@mySetting = v";
        assert_eq!(identity_hash(&q), reference_fnv1a(bytes));
    }

    #[test]
    fn class_name_changes_the_hash() {
        let a = id("PCBConfig", "mySetting:", "Send", "@mySetting = v");
        let b = id("PCBTest", "mySetting:", "Send", "@mySetting = v");
        assert_ne!(identity_hash(&a), identity_hash(&b));
        assert!(!identities_equal(&a, &b));
    }

    #[test]
    fn equality_is_fieldwise() {
        let a = id("A", "m", "Send", "1.add(1)");
        assert!(identities_equal(&a, &a.clone()));
        assert_eq!(identity_hash(&a), identity_hash(&a.clone()));
        assert!(!identities_equal(&a, &id("A", "n", "Send", "1.add(1)")));
        assert!(!identities_equal(&a, &id("B", "m", "Send", "1.add(1)")));
        assert!(!identities_equal(&a, &id("A", "m", "IntLit", "1.add(1)")));
    }

    #[test]
    fn separators_prevent_field_shifting() {
        let a = id("AB", "C", "Send", "x");
        let b = id("A", "BC", "Send", "x");
        assert_ne!(identity_hash(&a), identity_hash(&b));
    }
}
