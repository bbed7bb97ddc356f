use super::{Network, Samples};
use crate::error::Result;

/// Mean squared error over all outputs of the batch, `(1 / (B m)) sum (y_hat - y)^2`.
pub fn mse(net: &Network, batch: &Samples) -> Result<f64> {
    batch.check_against(net)?;
    let mut scratch = net.scratch();
    let mut acc = 0.0;
    for i in 0..batch.len() {
        let y_hat = net.forward_with(batch.input(i), &mut scratch)?;
        for (p, t) in y_hat.iter().zip(batch.target(i)) {
            acc += (p - t) * (p - t);
        }
    }
    Ok(acc / (batch.len() * batch.output_dim()) as f64)
}

/// MSE plus the Tikhonov penalty `lambda * sum W^2` (biases are not penalized).
pub fn loss(net: &Network, batch: &Samples, lambda: f64) -> Result<f64> {
    Ok(mse(net, batch)? + lambda * net.weight_norm_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::net::NetworkSpec;

    #[test]
    fn zero_net_against_ones() {
        let net = Network::zeros(&NetworkSpec::uniform(2, 3, 2, 1)).unwrap();
        let batch = Samples::from_rows(&[vec![0.1, 0.2], vec![3.0, -1.0]], &[vec![1.0], vec![1.0]]).unwrap();
        assert_eq!(loss(&net, &batch, 0.0).unwrap(), 1.0);
        assert_eq!(loss(&net, &batch, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn perfect_predictor_has_zero_loss() {
        let net = Network::init(&NetworkSpec::uniform(1, 4, 1, 1).with_seed(3)).unwrap();
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.3]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| net.forward(x).unwrap()).collect();
        let batch = Samples::from_rows(&xs, &ys).unwrap();
        assert_eq!(loss(&net, &batch, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn penalty_adds_lambda_times_weight_norm() {
        let net = Network::init(&NetworkSpec::uniform(2, 5, 2, 1).with_seed(9)).unwrap();
        let batch = Samples::from_rows(&[vec![0.5, 0.5]], &[vec![2.0]]).unwrap();
        let a = loss(&net, &batch, 0.0).unwrap();
        let b = loss(&net, &batch, 0.25).unwrap();
        assert!((b - a - 0.25 * net.weight_norm_sq()).abs() < 1e-14);
    }

    #[test]
    fn empty_batch_is_an_error() {
        let net = Network::zeros(&NetworkSpec::uniform(2, 3, 1, 1)).unwrap();
        assert!(matches!(loss(&net, &Samples::new(2, 1), 0.0), Err(Error::EmptyData(_))));
    }
}
