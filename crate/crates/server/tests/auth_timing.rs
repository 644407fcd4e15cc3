//! Login answers take the same time whether or not the username exists.

mod common;

use std::time::{Duration, Instant};

use common::*;
use reqwest::StatusCode;

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn unknown_user_and_wrong_password_take_similar_time() {
    let h = Builder {
        config: tutor_server::Config {
            argon2_memory_kib: 19_456,
            argon2_iterations: 2,
            ..test_config()
        },
        ..Builder::default()
    }
    .start()
    .await;
    h.learner("existing_user").await;
    // warm up both paths
    for _ in 0..3 {
        h.login("existing_user", "not the password").await;
        h.login("missing_user", "not the password").await;
    }
    let (mut known, mut unknown) = (Vec::new(), Vec::new());
    for _ in 0..15 {
        let t = Instant::now();
        assert_eq!(h.login("existing_user", "not the password").await.0, StatusCode::UNAUTHORIZED);
        known.push(t.elapsed());
        let t = Instant::now();
        assert_eq!(h.login("missing_user", "not the password").await.0, StatusCode::UNAUTHORIZED);
        unknown.push(t.elapsed());
    }
    let (a, b) = (median(known).as_secs_f64(), median(unknown).as_secs_f64());
    let ratio = a.max(b) / a.min(b);
    println!("wrong password {a:.4}s, unknown user {b:.4}s, ratio {ratio:.3}");
    assert!(ratio <= 1.10, "timing differs by {ratio}");
}
