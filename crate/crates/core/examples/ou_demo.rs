//! An Ornstein-Uhlenbeck path by Euler-Maruyama, and its stationary variance
//! against σ²/2θ.

use polydyn::random_bundle::ou_path;

fn main() -> polydyn::Result<()> {
    let (theta, sigma) = (1.0, 0.5);
    let path = ou_path(theta, sigma, 1.0, 0.01, 100_000, 7)?;
    let tail: Vec<f64> = path.iter().skip(1000).map(|p| p.1).collect();
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / tail.len() as f64;
    println!("first points: {:?}", &path[..3]);
    println!("stationary variance {var:.4}, expected {:.4}", sigma * sigma / (2.0 * theta));
    Ok(())
}
