//! JSON documents: RMDP instances, projection queries and policies.
//!
//! Floats are written with shortest round-trip representation, so
//! `read(write(x))` reproduces every entry bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{InstanceData, MdpInstance, Policy, ProjectionQuery};

/// Parses and validates an instance document.
pub fn read_instance(bytes: &[u8]) -> Result<MdpInstance> {
    let data: InstanceData = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    MdpInstance::new(data)
}

pub fn write_instance(instance: &MdpInstance) -> Vec<u8> {
    let mut out = serde_json::to_vec(instance.data()).expect("instance data always serializes");
    out.push(b'\n');
    out
}

pub fn load_instance(path: &Path) -> Result<MdpInstance> {
    read_instance(&std::fs::read(path)?)
}

pub fn save_instance(path: &Path, instance: &MdpInstance) -> Result<()> {
    std::fs::write(path, write_instance(instance))?;
    Ok(())
}

/// On-disk form of a single projection query. `accuracy` is supplied by the
/// caller at solve time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryDocument {
    pub nominal: Vec<f64>,
    pub cost: Vec<f64>,
    pub threshold: f64,
}

pub fn read_query(bytes: &[u8], accuracy: f64) -> Result<ProjectionQuery> {
    let doc: QueryDocument = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    ProjectionQuery::new(doc.nominal, doc.cost, doc.threshold, accuracy)
}

pub fn write_query(query: &ProjectionQuery) -> Vec<u8> {
    let doc = QueryDocument {
        nominal: query.nominal.clone(),
        cost: query.cost.clone(),
        threshold: query.threshold,
    };
    let mut out = serde_json::to_vec(&doc).expect("query serializes");
    out.push(b'\n');
    out
}

pub fn write_policy(policy: &Policy) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(policy).expect("policy serializes");
    out.push(b'\n');
    out
}

pub fn read_policy(bytes: &[u8]) -> Result<Policy> {
    let p: Policy = serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))?;
    p.check()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"states":1,"actions":1,"discount":0.9,"kappa":0.5,
        "divergence":"chi2","rewards":[2.0],"nominal":[1.0]}"#;

    #[test]
    fn minimal_document() {
        let inst = read_instance(MINIMAL.as_bytes()).unwrap();
        assert_eq!(inst.states(), 1);
        assert_eq!(inst.nominal(0, 0), &[1.0]);
        assert_eq!(inst.kind(), crate::DivergenceKind::ChiSquared);
    }

    #[test]
    fn missing_discount_names_field() {
        let doc = r#"{"states":1,"actions":1,"kappa":0.5,"divergence":"kl","rewards":[2.0],"nominal":[1.0]}"#;
        let err = read_instance(doc.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("discount"), "{err}");
    }

    #[test]
    fn parse_error_has_line_context() {
        let err = read_instance(b"{\n\"states\": 1,\n\"actions\": x }").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn invalid_values_rejected_on_read() {
        let doc = MINIMAL.replace("0.9", "1.5");
        assert!(matches!(read_instance(doc.as_bytes()), Err(Error::Validation(_))));
    }

    #[test]
    fn query_document() {
        let q = read_query(br#"{"nominal":[0.5,0.5],"cost":[0,1],"threshold":0.25}"#, 1e-6).unwrap();
        assert_eq!(q.threshold, 0.25);
        assert_eq!(read_query(&write_query(&q), 1e-6).unwrap(), q);
    }
}
