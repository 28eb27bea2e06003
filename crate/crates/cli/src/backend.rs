use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use codemix_core::llm::{Backend, Client, CompletionParams, MockBackend, MockMode, RateLimiter, Recorder, RemoteBackend, DEFAULT_ENDPOINT};

use crate::args::BackendArgs;

/// Builds the backend named by `args.backend`.
pub fn backend(args: &BackendArgs) -> anyhow::Result<Arc<dyn Backend>> {
    if args.backend == "mock" {
        let mode = if args.lenient { MockMode::Lenient } else { MockMode::Strict };
        let mock = match &args.fixtures {
            Some(path) => MockBackend::load("mock", path, mode)
                .with_context(|| format!("reading fixtures {}", path.display()))?,
            None => MockBackend::new("mock", mode),
        };
        Ok(Arc::new(mock))
    } else {
        let endpoint = args.endpoint.clone().unwrap_or_else(|| DEFAULT_ENDPOINT.to_string());
        Ok(Arc::new(RemoteBackend::from_env(args.backend.clone(), endpoint)))
    }
}

pub fn params(args: &BackendArgs) -> CompletionParams {
    CompletionParams {
        model_name: args.model.clone().unwrap_or_else(|| args.backend.clone()),
        temperature: args.temperature,
        max_output_tokens: args.max_tokens,
        timeout: Duration::from_secs_f64(args.timeout_secs),
        max_retries: args.max_retries,
        system_message: None,
    }
}

/// Client with the configured rate limit; records calls when `record`.
pub fn client(args: &BackendArgs, record: bool) -> anyhow::Result<Client> {
    let mut client = Client::new(backend(args)?);
    if let Some(n) = args.rate_limit {
        client = client.with_rate_limit(Arc::new(RateLimiter::new(n, Duration::from_secs_f64(args.rate_window_secs))));
    }
    if record {
        client = client.with_recorder(Arc::new(Recorder::new()));
    }
    Ok(client)
}
