//! Text normalization on a handful of raw posts.
//!
//! Run with: cargo run --example normalize

use hatemtl::textnorm::normalize;

fn main() {
    let posts = [
        "RT @user Check THIS!!!  \u{1F600} http://t.co/x",
        "So UNFAIR?! see www.example.com",
        "rt rt Nothing but #Hashtags here...",
        "\u{1F680}\u{1F680}",
    ];
    for post in posts {
        match normalize(post) {
            Some(clean) => println!("{post:?} -> {clean:?}"),
            None => println!("{post:?} -> (dropped: empty after normalization)"),
        }
    }
}
