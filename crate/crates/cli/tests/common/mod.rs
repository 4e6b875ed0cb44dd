#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CORPUS_SEED: u64 = 0x006d_6f79_616c;
pub const CORPUS_SIZE: usize = 100;

fn atom<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..12) {
        0 => rng.gen_range(0..20).to_string(),
        1 => format!("{}.{}", rng.gen_range(0..10), rng.gen_range(0..100)),
        2 | 3 => "x".into(),
        4 | 5 => "xi".into(),
        6 => "y".into(),
        7 => "eta".into(),
        8 => "hbar".into(),
        9 => "i".into(),
        10 => format!("{}{}", ["x", "xi"][rng.gen_range(0..2)], rng.gen_range(1..4)),
        _ => format!("gauss({}/{})", rng.gen_range(1..5), rng.gen_range(1..5)),
    }
}

/// A random expression with redundant parentheses and irregular spacing.
pub fn expression<R: Rng>(rng: &mut R, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return atom(rng);
    }
    let space = |rng: &mut R| if rng.gen_bool(0.5) { " " } else { "" };
    let s = match rng.gen_range(0..7) {
        0 => format!("{}{}+{}{}", expression(rng, depth - 1), space(rng), space(rng), expression(rng, depth - 1)),
        1 => format!("{}{}-{}{}", expression(rng, depth - 1), space(rng), space(rng), expression(rng, depth - 1)),
        2 | 3 => format!("{}{}*{}{}", expression(rng, depth - 1), space(rng), space(rng), expression(rng, depth - 1)),
        4 => format!("{} / {}", expression(rng, depth - 1), rng.gen_range(1..9)),
        5 => format!("-{}", expression(rng, depth - 1)),
        _ => format!("({})^{}", expression(rng, depth - 1), rng.gen_range(0..4)),
    };
    if rng.gen_bool(0.3) {
        format!("({s})")
    } else {
        s
    }
}

pub fn corpus() -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE).map(|_| expression(&mut rng, 4)).collect()
}

/// Texts whose canonical form is not a fixed point after one more round trip.
pub fn round_trip_failures(corpus: &[String]) -> Vec<String> {
    use moyal_lab::expr::parse_symbol;
    corpus
        .iter()
        .filter(|text| {
            let Ok(e) = parse_symbol(text) else { return true };
            let once = e.to_string();
            match parse_symbol(&once) {
                Ok(again) => again != e || again.to_string() != once,
                Err(_) => true,
            }
        })
        .cloned()
        .collect()
}
