//! Odd characteristics and Steiner sets in small genus.
//!
//! Run with `cargo run --example char2_steiner_sets`.

use thetacert::char2::{
    is_syzygetic, odd_characteristics, odd_count, steiner_set, steiner_set_size, CharPair, TwoTorsion,
};

fn main() {
    for g in 1..=7 {
        println!(
            "g = {g}: {:5} odd characteristics, {:5} Steiner sets of {:4} pairs",
            odd_count(g),
            (1u64 << (2 * g)) - 1,
            steiner_set_size(g)
        );
    }

    // In genus 3 every Steiner set is six disjoint bitangent pairs.
    let alpha = TwoTorsion::all_nonzero(3)[5];
    let set = steiner_set(alpha).unwrap();
    println!("\nSteiner set of {alpha}:");
    for p in &set.pairs {
        println!("  {p}");
    }
    println!("first two pairs syzygetic: {}", is_syzygetic(&set.pairs[0], &set.pairs[1]).unwrap());

    let odd = odd_characteristics(3).unwrap();
    let a = CharPair::new(odd[0], odd[1]).unwrap();
    let b = CharPair::new(odd[2], odd[3]).unwrap();
    println!("{a} and {b}: syzygetic = {}", is_syzygetic(&a, &b).unwrap());
}
