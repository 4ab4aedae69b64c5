use dyvar_core::io::format_grid_text;
use dyvar_core::GridFunction;
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the canonical text form.
pub fn grid_digest(f: &GridFunction) -> String {
    text_digest(&format_grid_text(f))
}

pub fn text_digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hex::encode(&hash[..8])
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyvar_core::Shape;

    #[test]
    fn digest_depends_on_values_only_through_canonical_text() {
        let s = Shape::new(1, 2).unwrap();
        let a = GridFunction::from_integers(s, &[0, 1, 2, 3]).unwrap();
        let b = GridFunction::from_integers(s, &[0, 1, 2, 3]).unwrap();
        let c = GridFunction::from_integers(s, &[0, 1, 2, 4]).unwrap();
        assert_eq!(grid_digest(&a), grid_digest(&b));
        assert_ne!(grid_digest(&a), grid_digest(&c));
        assert_eq!(grid_digest(&a).len(), 16);
    }
}
