//! Plain-text evidence files for one-off trust evaluations.
//!
//! ```text
//! # comments start with '#'
//! Data Quality = 9.8, 10.1, 10.0 ms      # measurements, optional unit at the end
//! Network Scalability = Medium           # a linguistic term
//! weight Data Quality = 3                # per-source weight override
//! ```

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::taxonomy::{FacetKind, Observation, Payload, Taxonomy, UncertaintySet};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evidence {
    pub set: UncertaintySet,
    /// Weight overrides keyed by source name.
    pub weights: BTreeMap<String, f64>,
}

pub fn parse_evidence(text: &str, taxonomy: &Taxonomy) -> Result<Evidence> {
    let mut out = Evidence::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |msg: String| Error::Input(format!("line {}: {msg}", i + 1));
        let (lhs, rhs) = line
            .split_once('=')
            .ok_or_else(|| at(format!("expected `name = value`, got {line:?}")))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());

        if let Some(source) = lhs.strip_prefix("weight ") {
            let source = source.trim();
            if !taxonomy.sources().iter().any(|s| s.name == source) {
                return Err(at(format!("unknown source {source:?}")));
            }
            let w: f64 = rhs
                .parse()
                .map_err(|_| at(format!("weight {rhs:?} is not a number")))?;
            if !(w.is_finite() && w > 0.0) {
                return Err(at(format!("weight {w} must be positive")));
            }
            out.weights.insert(source.to_string(), w);
            continue;
        }

        let facet = taxonomy
            .facet_by_name(lhs)
            .map_err(|_| at(format!("unknown facet {lhs:?}")))?;
        let payload = match facet.kind {
            FacetKind::Epistemic => Payload::Qual {
                term: rhs.to_string(),
            },
            FacetKind::Aleatoric => {
                let (samples, unit) = parse_samples(rhs).map_err(at)?;
                Payload::Quant { samples, unit }
            }
        };
        let obs = Observation::new(facet, payload).map_err(|e| at(e.to_string()))?;
        out.set.push(obs);
    }
    if out.set.is_empty() {
        return Err(Error::Input("evidence file has no observations".into()));
    }
    Ok(out)
}

fn parse_samples(rhs: &str) -> std::result::Result<(Vec<f64>, String), String> {
    let mut parts: Vec<&str> = rhs.split(',').map(str::trim).collect();
    let mut unit = String::new();
    if let Some(last) = parts.last_mut() {
        if let Some((num, u)) = last.split_once(char::is_whitespace) {
            unit = u.trim().to_string();
            *last = num;
        }
    }
    let samples = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("{p:?} is not a finite number"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((samples, unit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_mixed_evidence() {
        let tax = Taxonomy::canonical();
        let text = "# header\n\
            Data Quality = 9.8, 10.1, 10.0 ms\n\
            Network Scalability = Medium  # label\n\
            \n\
            weight Data Quality = 3\n";
        let ev = parse_evidence(text, &tax).unwrap();
        assert_eq!(ev.set.len(), 2);
        assert_eq!(
            ev.set.elements()[0].payload(),
            &Payload::Quant {
                samples: vec![9.8, 10.1, 10.0],
                unit: "ms".into()
            }
        );
        assert_eq!(ev.weights["Data Quality"], 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let tax = Taxonomy::canonical();
        let err = parse_evidence("Data Quality = 1, 2\nNope = 3\n", &tax).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_evidence("Network Scalability = Huge\n", &tax).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_evidence("Data Quality = 1, x\n", &tax).unwrap_err();
        assert!(err.to_string().contains("\"x\""), "{err}");
        assert!(parse_evidence("# nothing\n", &tax).is_err());
    }
}
