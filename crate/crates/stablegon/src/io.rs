//! File formats: quiver and polygon JSON, plus report envelopes.
//!
//! Rationals serialize as `"p/q"` strings (lowest terms, positive
//! denominator, bare `"p"` when the denominator is 1). Satellites are never
//! serialized; they are re-derived on load so the relations stay
//! authoritative.

use crate::dynkin::{DynkinQuiver, DynkinType, Family, Sign};
use crate::geom::{rat_from_str, rat_to_string, RatPoint};
use crate::polygon::{PolygonData, StablePolygon};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Schema(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuiverFile {
    pub dynkin_type: String,
    pub rank: usize,
    pub orientation: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolygonFile {
    pub dynkin_type: String,
    pub rank: usize,
    pub vertices: Vec<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub punctures: Option<[[String; 2]; 2]>,
}

fn family_from_str(s: &str) -> Result<Family, IoError> {
    match s {
        "A" => Ok(Family::A),
        "D" => Ok(Family::D),
        "E" => Ok(Family::E),
        other => Err(IoError::Schema(format!("unknown dynkin_type `{other}`"))),
    }
}

pub fn quiver_to_json(q: &DynkinQuiver) -> String {
    let file = QuiverFile {
        dynkin_type: q.dtype().family().to_string(),
        rank: q.rank(),
        orientation: q
            .orientation()
            .iter()
            .map(|s| if *s == Sign::Plus { "+" } else { "-" }.to_string())
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("quiver serialization cannot fail")
}

pub fn quiver_from_json(text: &str) -> Result<DynkinQuiver, IoError> {
    let file: QuiverFile =
        serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let dtype = DynkinType::new(family_from_str(&file.dynkin_type)?, file.rank)
        .map_err(|e| IoError::Schema(e.to_string()))?;
    let orientation = file
        .orientation
        .iter()
        .map(|s| match s.as_str() {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            other => Err(IoError::Schema(format!("bad orientation sign `{other}`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    DynkinQuiver::new(dtype, orientation).map_err(|e| IoError::Schema(e.to_string()))
}

fn point_to_pair(p: &RatPoint) -> [String; 2] {
    [rat_to_string(&p.x), rat_to_string(&p.y)]
}

fn point_from_pair(pair: &[String; 2]) -> Result<RatPoint, IoError> {
    Ok(RatPoint::new(
        rat_from_str(&pair[0]).map_err(|e| IoError::Schema(e.to_string()))?,
        rat_from_str(&pair[1]).map_err(|e| IoError::Schema(e.to_string()))?,
    ))
}

pub fn polygon_to_json(p: &StablePolygon) -> String {
    let raw = p.raw();
    let file = PolygonFile {
        dynkin_type: raw.dtype.family().to_string(),
        rank: raw.dtype.rank(),
        vertices: raw.vertices.iter().map(point_to_pair).collect(),
        punctures: raw
            .punctures
            .as_ref()
            .map(|(bm, bp)| [point_to_pair(bm), point_to_pair(bp)]),
    };
    serde_json::to_string_pretty(&file).expect("polygon serialization cannot fail")
}

/// Parse and validate: the returned polygon has passed every defining
/// relation of its type.
pub fn polygon_from_json(text: &str) -> Result<StablePolygon, IoError> {
    let file: PolygonFile =
        serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    let dtype = DynkinType::new(family_from_str(&file.dynkin_type)?, file.rank)
        .map_err(|e| IoError::Schema(e.to_string()))?;
    let vertices = file
        .vertices
        .iter()
        .map(point_from_pair)
        .collect::<Result<Vec<_>, _>>()?;
    let punctures = match &file.punctures {
        Some([bm, bp]) => Some((point_from_pair(bm)?, point_from_pair(bp)?)),
        None => None,
    };
    StablePolygon::validate_relations(PolygonData {
        dtype,
        vertices,
        punctures,
    })
    .map_err(|e| IoError::Schema(e.to_string()))
}

/// Hex SHA-256 of raw input bytes, recorded in reports for auditability.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::rat;
    use proptest::prelude::*;

    #[test]
    fn quiver_roundtrip() {
        let t = DynkinType::new(Family::D, 5).unwrap();
        let q = DynkinQuiver::new(t, vec![Sign::Plus, Sign::Minus, Sign::Minus, Sign::Plus])
            .unwrap();
        let text = quiver_to_json(&q);
        assert!(text.contains("\"D\""));
        let back = quiver_from_json(&text).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn quiver_rejects_bad_signs_and_rank() {
        assert!(quiver_from_json(r#"{"dynkin_type":"A","rank":3,"orientation":["+","?"]}"#)
            .is_err());
        assert!(quiver_from_json(r#"{"dynkin_type":"E","rank":9,"orientation":[]}"#).is_err());
        assert!(quiver_from_json(r#"{"dynkin_type":"A","rank":3,"orientation":["+"]}"#).is_err());
    }

    #[test]
    fn polygon_roundtrip_validates() {
        let hex = crate::polygon::test_hexagon_a5();
        let text = polygon_to_json(&hex);
        let back = polygon_from_json(&text).unwrap();
        assert_eq!(back.vertices(), hex.vertices());
        assert!(text.contains("7/2"));
    }

    #[test]
    fn polygon_json_rejects_bad_relations() {
        // A "D4" polygon without punctures.
        let text = r#"{"dynkin_type":"D","rank":4,
          "vertices":[["1","-2"],["2","0"],["1","2"],["-1","2"],["-2","0"],["-1","-2"]]}"#;
        assert!(polygon_from_json(text).is_err());
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            content_hash(b"stablegon"),
            content_hash(b"stablegon"),
        );
        assert_ne!(content_hash(b"a"), content_hash(b"b"));
    }

    proptest! {
        #[test]
        fn rational_string_roundtrip(p in -1000i64..1000, q in 1i64..1000) {
            let r = rat(p, q);
            let s = rat_to_string(&r);
            prop_assert_eq!(rat_from_str(&s).unwrap(), r);
        }
    }
}
