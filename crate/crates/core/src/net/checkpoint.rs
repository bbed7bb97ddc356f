use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Network, NetworkSpec};
use crate::error::{Error, Result};
use crate::io;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    spec: NetworkSpec,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

pub fn network_to_json(net: &Network) -> Result<String> {
    io::to_json_string(&Checkpoint {
        spec: net.spec().clone(),
        weights: net.layers().iter().map(|l| l.weights().to_vec()).collect(),
        biases: net.layers().iter().map(|l| l.biases().to_vec()).collect(),
    })
}

pub fn network_from_json(text: &str, context: &str) -> Result<Network> {
    let ck: Checkpoint = serde_json::from_str(text).map_err(|e| Error::parse(context, e))?;
    Network::from_parts(ck.spec, ck.weights, ck.biases).map_err(|e| Error::parse(context, e))
}

pub fn save_network(net: &Network, path: &Path) -> Result<()> {
    io::write_json(path, &Checkpoint {
        spec: net.spec().clone(),
        weights: net.layers().iter().map(|l| l.weights().to_vec()).collect(),
        biases: net.layers().iter().map(|l| l.biases().to_vec()).collect(),
    })
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path)?;
    network_from_json(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn round_trip_is_bitwise() {
        let spec = NetworkSpec::uniform(3, 7, 4, 2).with_shortcuts(2).with_seed(12);
        let net = Network::random_like(&spec, 0.2, 12).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        save_network(&net, &path).unwrap();
        let back = load_network(&path).unwrap();
        assert_eq!(back, net);
        let mut rng = crate::rng::stream(1, 1);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let a = net.forward(&x).unwrap();
            let b = back.forward(&x).unwrap();
            assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let net = Network::init(&NetworkSpec::uniform(1, 3, 1, 1)).unwrap();
        let text = network_to_json(&net).unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(network_from_json(cut, "cut"), Err(Error::Parse { .. })));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let text = r#"{"spec":{"input_dim":2,"hidden_widths":[3],"output_dim":1},
            "weights":[[1,2,3,4,5,6],[1,2]],"biases":[[0,0,0],[0]]}"#;
        let err = network_from_json(text, "bad").unwrap_err();
        assert!(err.to_string().contains("layer 1"), "{err}");
    }
}
