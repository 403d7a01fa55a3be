//! JSON form of a spec. Probabilities and means are decimal strings with
//! 17 significant digits, which round-trip every `f64` exactly.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GameDims, MultiMdpSet, NoiseModel, StochasticGameSpec};
use crate::error::{Error, Result};

type Nested = Vec<Vec<Vec<Vec<String>>>>;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecDoc {
    players: usize,
    actions: usize,
    states: usize,
    horizon: usize,
    p0: Vec<String>,
    kernel: Nested,
    means: Nested,
    noise: String,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| Error::Data(format!("not a decimal number: {s:?}")))
}

impl SpecDoc {
    fn from_spec(spec: &StochasticGameSpec) -> Self {
        let d = spec.dims();
        let p = d.profiles();
        let kernel = (0..d.horizon - 1)
            .map(|h| {
                (0..d.states)
                    .map(|x| {
                        (0..p)
                            .map(|a| spec.transition_row(x, h, a).iter().map(|&v| fmt_f64(v)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let means = (0..d.horizon)
            .map(|h| {
                (0..d.states)
                    .map(|x| {
                        (0..p)
                            .map(|a| spec.mean_row(x, h, a).iter().map(|&v| fmt_f64(v)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            players: d.players,
            actions: d.actions,
            states: d.states,
            horizon: d.horizon,
            p0: spec.initial_distribution().iter().map(|&v| fmt_f64(v)).collect(),
            kernel,
            means,
            noise: spec.noise().label(),
        }
    }

    fn into_spec(self) -> Result<StochasticGameSpec> {
        let noise = match self.noise.as_str() {
            "deterministic" => NoiseModel::Deterministic,
            "bernoulli" => NoiseModel::Bernoulli,
            other => {
                return Err(Error::Data(format!(
                    "noise model {other:?} cannot be restored from JSON"
                )))
            }
        };
        let dims = GameDims::new(self.players, self.actions, self.states, self.horizon);
        let conv = |t: Nested| -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
            t.into_iter()
                .map(|s| {
                    s.into_iter()
                        .map(|r| {
                            r.into_iter()
                                .map(|v| v.iter().map(|x| parse_f64(x)).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect()
        };
        let p0 = self.p0.iter().map(|s| parse_f64(s)).collect::<Result<_>>()?;
        StochasticGameSpec::from_nested(dims, p0, &conv(self.kernel)?, &conv(self.means)?, noise)
    }
}

impl StochasticGameSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&SpecDoc::from_spec(self)).expect("spec documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDoc = serde_json::from_str(text)?;
        doc.into_spec()
    }
}

impl Serialize for StochasticGameSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecDoc::from_spec(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for StochasticGameSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SpecDoc::deserialize(d)?
            .into_spec()
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for MultiMdpSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.mdps.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiMdpSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mdps = Vec::<StochasticGameSpec>::deserialize(d)?;
        MultiMdpSet::new(mdps).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use crate::game::{generate_random_game, StochasticGameSpec};

    #[test]
    fn json_round_trip_is_bit_exact() {
        let spec = generate_random_game(2, 2, 3, 3, 11).unwrap();
        let text = spec.to_json();
        let back = StochasticGameSpec::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.kernel, spec.kernel);
        assert_eq!(back.means, spec.means);
        assert_eq!(back.initial, spec.initial);
    }

    #[test]
    fn rejects_unknown_noise() {
        let spec = generate_random_game(1, 2, 2, 1, 1).unwrap();
        let text = spec.to_json().replace("\"bernoulli\"", "\"custom:x\"");
        assert!(StochasticGameSpec::from_json(&text).is_err());
    }
}
