//! Seeded generation of product events from the configured source, with
//! the exact event probability alpha = P(E).

use std::fs;

use ghz_core::games::ProductEvent;
use ghz_core::rat::Rational;
use ghz_core::{BitWord, Bitset};
use rand::Rng;
use serde_json::Value;

use crate::config::{EventSource, ExperimentConfig, LabError};

/// The generated event together with its exact probability under the
/// repeated query distribution.
pub struct GeneratedEvent {
    pub event: ProductEvent,
    pub alpha: Rational,
}

/// Builds the event from `config.source`, drawing randomness (density mode
/// only) from `rng`. Alpha is computed exactly; alpha = 0 is reported, not
/// an error, so callers can flag it.
pub fn gen_event<R: Rng>(
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<GeneratedEvent, LabError> {
    config.validate()?;
    let n = config.n;
    let sets = match &config.source {
        EventSource::Density(p) => [0; 3].map(|_| {
            let mut s = Bitset::empty(n);
            for bits in 0..1u32 << n {
                if rng.gen_bool(*p) {
                    s.insert(&BitWord::new(n, bits));
                }
            }
            s
        }),
        EventSource::Affine(gammas) => {
            let sets: Vec<Bitset> = gammas
                .iter()
                .map(|g| {
                    let mut s = Bitset::empty(n);
                    for bits in 0..1u32 << n {
                        let x = BitWord::new(n, bits);
                        if !g.dot(&x) {
                            s.insert(&x);
                        }
                    }
                    s
                })
                .collect();
            sets.try_into().expect("three factors")
        }
        EventSource::File(path) => read_event_file(n, &fs::read_to_string(path)?)?,
    };
    let event = ProductEvent::new(n, sets);
    let alpha = event.prob_ghz();
    Ok(GeneratedEvent { event, alpha })
}

/// Parses `{"n": 2, "sets": [["0x0", ...], [...], [...]]}`.
pub fn read_event_file(n: usize, text: &str) -> Result<[Bitset; 3], LabError> {
    let value: Value = serde_json::from_str(text)?;
    let file_n = value
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| LabError::BadEventFile("missing \"n\"".into()))?;
    if file_n as usize != n {
        return Err(LabError::BadEventFile(format!(
            "file has n = {file_n}, expected {n}"
        )));
    }
    let lists = value
        .get("sets")
        .and_then(Value::as_array)
        .filter(|a| a.len() == 3)
        .ok_or_else(|| LabError::BadEventFile("\"sets\" must be three arrays".into()))?;
    let mut sets = Vec::with_capacity(3);
    for list in lists {
        let members = list
            .as_array()
            .ok_or_else(|| LabError::BadEventFile("factor must be an array".into()))?;
        let mut s = Bitset::empty(n);
        for m in members {
            let hex = m
                .as_str()
                .ok_or_else(|| LabError::BadEventFile("members must be hex strings".into()))?;
            s.insert(&BitWord::from_hex(n, hex)?);
        }
        sets.push(s);
    }
    Ok(sets.try_into().expect("three factors"))
}

/// Serializes an event in the file format accepted by [`read_event_file`].
pub fn event_to_json(event: &ProductEvent) -> Value {
    let sets: Vec<Value> = event
        .sets()
        .iter()
        .map(|s| {
            let mut members: Vec<BitWord> = s.iter().collect();
            members.sort();
            Value::Array(members.iter().map(|m| Value::String(m.to_hex())).collect())
        })
        .collect();
    serde_json::json!({ "n": event.n(), "sets": sets })
}
