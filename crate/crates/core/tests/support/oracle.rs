//! Brute-force reference implementations used to check the metrics.
#![allow(dead_code)]

use codemix_core::metrics::tokenize;

pub fn toks(s: &str) -> Vec<String> {
    tokenize(s).tokens
}

/// Hand-built pairs: overlaps, reorderings, repeats, length mismatches,
/// punctuation, mixed scripts.
pub const PAIRS: &[(&str, &str)] = &[
    ("the cat sat on the mat", "the cat sat on a mat"),
    ("a b c d", "a c b d"),
    ("the the the the", "the cat is on the mat"),
    ("main kal market jaunga", "main kal market jaoonga"),
    ("ami tomake bhalobashi khub", "ami tomake khub bhalobashi"),
    ("this movie was really awesome yaar", "yaar this movie was awesome"),
    ("Hello, how are you?", "hello how are you"),
    ("kal meeting hai office mein", "office mein kal meeting hai"),
    ("I will call you tomorrow morning", "I will call you tomorrow"),
    ("tomorrow", "I will call you tomorrow"),
    ("a a a b b b", "a b a b a b"),
    ("one two three four five six", "one two three four five six"),
    ("x y z", "p q r s"),
    ("ye phone bahut slow hai", "yeh phone bohot slow hai"),
    ("please send me the report asap", "please send the report to me asap"),
    ("it's raining cats and dogs", "it is raining cats and dogs"),
    ("tumi ki office e jabe?", "tumi ki aaj office jabe?"),
    ("le chat est sur le tapis", "le chat est sur la natte"),
    ("el gato negro duerme", "el gato duerme"),
    ("good good good morning", "good morning"),
    ("मैं घर जा रहा हूं", "मैं घर जा रहा हूँ"),
    ("the quick brown fox jumps", "quick brown the fox jumps"),
    ("running runners ran", "run runner running"),
    ("translations are hard work", "translation is hard work"),
];

fn ngrams(t: &[String], n: usize) -> Vec<&[String]> {
    if t.len() < n {
        return Vec::new();
    }
    (0..=t.len() - n).map(|i| &t[i..i + n]).collect()
}

/// Corpus BLEU in [0, 1] by explicit n-gram enumeration with clipping.
pub fn bleu(pairs: &[(Vec<String>, Vec<String>)]) -> f64 {
    let (mut c, mut r) = (0usize, 0usize);
    let mut matched = [0usize; 4];
    let mut total = [0usize; 4];
    for (h, rf) in pairs {
        c += h.len();
        r += rf.len();
        for n in 1..=4 {
            let hg = ngrams(h, n);
            let rg = ngrams(rf, n);
            total[n - 1] += hg.len();
            let mut seen: Vec<&[String]> = Vec::new();
            for g in &hg {
                if seen.contains(g) {
                    continue;
                }
                seen.push(g);
                let in_h = hg.iter().filter(|x| *x == g).count();
                let in_r = rg.iter().filter(|x| *x == g).count();
                matched[n - 1] += in_h.min(in_r);
            }
        }
    }
    if matched.contains(&0) {
        return 0.0;
    }
    let bp = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    let product: f64 = (0..4).map(|i| matched[i] as f64 / total[i] as f64).product();
    bp * product.powf(0.25)
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// LCS length by trying every subsequence of `a`. Exponential; keep inputs
/// short.
pub fn lcs(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16, "oracle input too long");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let k = mask.count_ones() as usize;
        if k <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        if is_subsequence(&sub, b) {
            best = k;
        }
    }
    best
}

pub fn rouge_l_f1(h: &[String], r: &[String]) -> f64 {
    let l = lcs(h, r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / h.len() as f64;
    let rc = l / r.len() as f64;
    2.0 * p * rc / (p + rc)
}

/// METEOR with exact then (optionally) stem matching. Each stage walks the
/// hypothesis and reference from the end, pairing first equal unused words.
pub fn meteor(h: &[String], r: &[String], stemming: bool) -> f64 {
    let mut h_used = vec![false; h.len()];
    let mut r_used = vec![false; r.len()];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    type Key = Box<dyn Fn(&str) -> String>;
    let stage_keys: Vec<Key> = if stemming {
        vec![Box::new(|w: &str| w.to_string()), Box::new(|w: &str| porter_stemmer::stem(w))]
    } else {
        vec![Box::new(|w: &str| w.to_string())]
    };
    for key in &stage_keys {
        for i in (0..h.len()).rev() {
            if h_used[i] {
                continue;
            }
            for j in (0..r.len()).rev() {
                if !r_used[j] && key(&h[i]) == key(&r[j]) {
                    h_used[i] = true;
                    r_used[j] = true;
                    pairs.push((i, j));
                    break;
                }
            }
        }
    }
    let m = pairs.len();
    if m == 0 {
        return 0.0;
    }
    pairs.sort();
    let mut chunks = 1;
    for w in pairs.windows(2) {
        if w[1].0 != w[0].0 + 1 || w[1].1 != w[0].1 + 1 {
            chunks += 1;
        }
    }
    let p = m as f64 / h.len() as f64;
    let rc = m as f64 / r.len() as f64;
    let f_mean = p * rc / (0.9 * p + 0.1 * rc);
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    f_mean * (1.0 - penalty)
}
