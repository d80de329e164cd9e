use std::collections::{HashMap, HashSet};
use std::sync::Mutex;
use std::time::Duration;

use thiserror::Error;

use super::record::{Dataset, Language, Source, TweetRecord};
use super::CorpusError;

/// Network-level failure; the request may succeed if retried.
#[derive(Debug, Clone, Error)]
#[error("transport failure: {0}")]
pub struct TransportError(pub String);

/// Get-tweet-by-id contract: `Ok(Some(text))` when found, `Ok(None)` when the
/// tweet is gone, `Err` on a transport failure.
pub trait TweetTransport {
    fn get_tweet(&self, id: &str) -> Result<Option<String>, TransportError>;
}

pub trait Clock {
    fn sleep(&self, duration: Duration);
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

/// Records requested sleeps without waiting.
#[derive(Debug, Default)]
pub struct ManualClock {
    slept: Mutex<Vec<Duration>>,
}

impl ManualClock {
    pub fn sleeps(&self) -> Vec<Duration> {
        self.slept.lock().unwrap().clone()
    }
}

impl Clock for ManualClock {
    fn sleep(&self, duration: Duration) {
        self.slept.lock().unwrap().push(duration);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FetchPolicy {
    pub attempts: u32,
    pub base_backoff: Duration,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            attempts: 3,
            base_backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FetchOutcome {
    pub dataset: Dataset,
    pub missing: Vec<String>,
}

/// Downloads tweet texts by id, preserving input order.
///
/// Not-found ids are reported in `missing`. Transport failures are retried
/// with exponential backoff; ids that still fail surface as
/// [`CorpusError::Ingestion`] carrying everything fetched so far.
pub fn fetch_tweets_by_id<T: TweetTransport + ?Sized, C: Clock + ?Sized>(
    ids: &[String],
    transport: &T,
    clock: &C,
    policy: FetchPolicy,
    name: &str,
    language: Language,
) -> Result<FetchOutcome, CorpusError> {
    let mut seen = HashSet::new();
    let mut records = Vec::new();
    let mut missing = Vec::new();
    let mut unfetched = Vec::new();

    for id in ids {
        if !seen.insert(id.as_str()) {
            continue;
        }
        let mut result = Err(TransportError("no attempt made".into()));
        for attempt in 0..policy.attempts.max(1) {
            result = transport.get_tweet(id);
            if result.is_ok() {
                break;
            }
            if attempt + 1 < policy.attempts {
                clock.sleep(policy.base_backoff * 2u32.pow(attempt));
            }
        }
        match result {
            Ok(Some(text)) if !text.trim().is_empty() => {
                records.push(TweetRecord::new(id.clone(), text, Source::TwitterApi));
            }
            Ok(_) => missing.push(id.clone()),
            Err(_) => unfetched.push(id.clone()),
        }
    }

    let dataset = Dataset::new(name, language, records)?;
    if !unfetched.is_empty() {
        return Err(CorpusError::Ingestion {
            unfetched,
            partial: Box::new(dataset),
        });
    }
    Ok(FetchOutcome { dataset, missing })
}

/// Test double backed by a map; ids listed in `failures` fail that many
/// times before answering.
#[derive(Debug, Default)]
pub struct InMemoryTransport {
    tweets: HashMap<String, String>,
    failures: Mutex<HashMap<String, u32>>,
}

impl InMemoryTransport {
    pub fn new(tweets: HashMap<String, String>) -> Self {
        InMemoryTransport {
            tweets,
            failures: Mutex::new(HashMap::new()),
        }
    }

    pub fn fail_times(self, id: impl Into<String>, times: u32) -> Self {
        self.failures.lock().unwrap().insert(id.into(), times);
        self
    }
}

impl TweetTransport for InMemoryTransport {
    fn get_tweet(&self, id: &str) -> Result<Option<String>, TransportError> {
        let mut failures = self.failures.lock().unwrap();
        if let Some(left) = failures.get_mut(id) {
            if *left > 0 {
                *left -= 1;
                return Err(TransportError(format!("connection reset fetching {id}")));
            }
        }
        Ok(self.tweets.get(id).cloned())
    }
}
