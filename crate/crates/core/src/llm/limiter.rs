use std::collections::VecDeque;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

/// Sliding-window limiter: at most `max_requests` starts within any `window`.
/// Shared by every in-flight request of a client.
#[derive(Debug)]
pub struct RateLimiter {
    max_requests: usize,
    window: Duration,
    starts: Mutex<VecDeque<Instant>>,
}

impl RateLimiter {
    pub fn new(max_requests: usize, window: Duration) -> Self {
        assert!(max_requests > 0, "rate limit must allow at least one request");
        Self { max_requests, window, starts: Mutex::new(VecDeque::new()) }
    }

    pub fn max_requests(&self) -> usize {
        self.max_requests
    }

    pub fn window(&self) -> Duration {
        self.window
    }

    /// Blocks until a slot is free, then claims it. Returns the claim time.
    pub fn acquire(&self) -> Instant {
        loop {
            let wait = {
                let mut starts = self.starts.lock().expect("limiter poisoned");
                let now = Instant::now();
                while starts.front().is_some_and(|&t| now.duration_since(t) >= self.window) {
                    starts.pop_front();
                }
                if starts.len() < self.max_requests {
                    starts.push_back(now);
                    return now;
                }
                self.window - now.duration_since(starts[0])
            };
            thread::sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn never_exceeds_window() {
        let limiter = Arc::new(RateLimiter::new(3, Duration::from_millis(60)));
        let starts = Arc::new(Mutex::new(Vec::new()));
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let (l, s) = (limiter.clone(), starts.clone());
                thread::spawn(move || {
                    for _ in 0..3 {
                        let t = l.acquire();
                        s.lock().unwrap().push(t);
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        let mut v = starts.lock().unwrap().clone();
        v.sort();
        assert_eq!(v.len(), 12);
        for (i, t) in v.iter().enumerate() {
            let in_window = v[i..].iter().take_while(|u| u.duration_since(*t) < Duration::from_millis(60)).count();
            assert!(in_window <= 3, "{in_window} starts within one window");
        }
    }
}
