//! Shared synthetic data generators for the benchmarks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use affect_core::Matrix;

/// Dense random design matrix with a linear-plus-noise target.
pub fn regression_data(n: usize, d: usize, seed: u64) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| {
            let signal: f64 = r.iter().enumerate().map(|(j, v)| v / (j + 1) as f64).sum();
            signal + rng.random_range(-0.1..0.1)
        })
        .collect();
    (Matrix::from_rows(&rows).unwrap(), y)
}

/// Ordinal targets binned from a 1-D latent score.
pub fn ordinal_data(n: usize, k: usize, seed: u64) -> (Matrix, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-3.0..3.0)]).collect();
    let y: Vec<usize> =
        rows.iter().map(|r| (((r[0] + 3.0) / 6.0 * k as f64) as usize).min(k - 1)).collect();
    (Matrix::from_rows(&rows).unwrap(), y)
}

/// A batch of tweet-like texts exercising every tokenizer path.
pub fn sample_texts(n: usize) -> Vec<String> {
    let templates = [
        "@user{i} thanks so much for this!! 😂😂",
        "check https://t.co/x{i}Yz at 10:30am #breaking",
        "call 555-123-{i:04} NOW... seriously",
        "so happy today 🎉🔥 #blessed #joy{i}",
        "can't believe it's over 😭 www.site{i}.io",
    ];
    (0..n)
        .map(|i| {
            let t = templates[i % templates.len()];
            t.replace("{i:04}", &format!("{:04}", i % 10_000)).replace("{i}", &i.to_string())
        })
        .collect()
}
