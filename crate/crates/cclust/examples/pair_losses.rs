//! The two pair objectives on hand-picked distributions.
//!
//! ```bash
//! cargo run --release -p cclust --example pair_losses
//! ```

use cclust::loss::{ccl_pair_loss, kcl_pair_loss, pair_similarity_prob, PairLabel, ProbVector};

fn main() {
    let cases = [
        ("identical one-hot", ProbVector::one_hot(3, 0), ProbVector::one_hot(3, 0)),
        ("orthogonal one-hot", ProbVector::one_hot(3, 0), ProbVector::one_hot(3, 1)),
        (
            "soft overlap",
            ProbVector::new(vec![0.8, 0.2, 0.0]).unwrap(),
            ProbVector::new(vec![0.6, 0.4, 0.0]).unwrap(),
        ),
        ("uniform pair", ProbVector::uniform(3), ProbVector::uniform(3)),
    ];

    println!("{:<20} {:>8} {:>10} {:>10} {:>10} {:>10}", "pair", "p.q", "ccl sim", "ccl dis", "kcl sim", "kcl dis");
    for (name, p, q) in &cases {
        let s = pair_similarity_prob(p, q).unwrap();
        let ccl_sim = ccl_pair_loss(p, q, PairLabel::Similar).unwrap().loss;
        let ccl_dis = ccl_pair_loss(p, q, PairLabel::Dissimilar).unwrap().loss;
        let kcl_sim = kcl_pair_loss(p, q, PairLabel::Similar, 2.0).unwrap().loss;
        let kcl_dis = kcl_pair_loss(p, q, PairLabel::Dissimilar, 2.0).unwrap().loss;
        println!("{name:<20} {s:>8.4} {ccl_sim:>10.4} {ccl_dis:>10.4} {kcl_sim:>10.4} {kcl_dis:>10.4}");
    }

    // the likelihood structure ties the two labels together:
    // exp(-loss_sim) + exp(-loss_dis) = s + (1 - s) = 1
    let p = ProbVector::new(vec![0.3, 0.45, 0.25]).unwrap();
    let q = ProbVector::new(vec![0.5, 0.1, 0.4]).unwrap();
    let ls = ccl_pair_loss(&p, &q, PairLabel::Similar).unwrap().loss;
    let ld = ccl_pair_loss(&p, &q, PairLabel::Dissimilar).unwrap().loss;
    println!("\ncomplement identity: exp(-l_sim) + exp(-l_dis) = {:.12}", (-ls).exp() + (-ld).exp());
}
