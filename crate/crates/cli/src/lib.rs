//! Command-line front end and HTTP service for the code-mixed MT lab.

pub mod args;
pub mod backend;
pub mod commands;
pub mod server;

use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::Context;
use codemix_core::chatbot::{build_index, ChatConfig, ChatEngine, Index, RemoteEmbeddingScorer, RemoteReranker};
use codemix_core::llm::api_key_var;

use args::{ChatbotCommand, Cli, Command, ServeArgs};

fn load_index(args: &ServeArgs) -> anyhow::Result<Index> {
    match &args.doc {
        Some(doc) => {
            let text = std::fs::read_to_string(doc).with_context(|| format!("reading {}", doc.display()))?;
            Ok(build_index(&text, codemix_core::chatbot::DEFAULT_LEAF_SIZE, codemix_core::chatbot::DEFAULT_PARENT_SIZE)?)
        }
        None => Index::load(&args.index).with_context(|| format!("loading index {}", args.index.display())),
    }
}

/// Chat engine for `serve`, with optional remote scorer and reranker.
pub fn engine(args: &ServeArgs, index: Index) -> anyhow::Result<ChatEngine> {
    let client = backend::client(&args.backend, false)?;
    let config = ChatConfig {
        history_turns: args.history,
        bridge_pairs: args.bridge_pairs.clone(),
        params: backend::params(&args.backend),
        ..ChatConfig::default()
    };
    let mut engine = ChatEngine::new(Arc::new(index), client, config);
    if let Some(url) = &args.embedding_endpoint {
        let key = std::env::var(api_key_var("embedding")).ok();
        engine = engine.with_scorer(Arc::new(RemoteEmbeddingScorer::new(url, &args.embedding_model, key)));
    }
    if let Some(url) = &args.rerank_endpoint {
        let key = std::env::var(api_key_var("rerank")).ok();
        engine = engine.with_reranker(Arc::new(RemoteReranker::new(url, &args.rerank_model, key)));
    }
    Ok(engine)
}

/// Binds first, then loads the index in the background so /health can
/// report 503 while it loads.
pub async fn serve(args: ServeArgs) -> anyhow::Result<()> {
    let state = server::AppState::new(args.history, args.token.clone());
    let app = server::router(state.clone(), args.cors_origin.as_deref())?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);

    let loader_state = state.clone();
    let loader = tokio::task::spawn_blocking(move || -> anyhow::Result<()> {
        let index = load_index(&args)?;
        loader_state.set_engine(engine(&args, index)?);
        log::info!("index loaded");
        Ok(())
    });
    tokio::spawn(async move {
        match loader.await {
            Ok(Ok(())) => {}
            Ok(Err(e)) => log::error!("index load failed: {e:#}"),
            Err(e) => log::error!("index loader panicked: {e}"),
        }
    });
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub fn run_cli(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(a) => commands::run(&a),
        Command::Rules(a) => commands::rules(&a),
        Command::Score(a) => commands::score(&a),
        Command::Table(a) => commands::table(&a).map(|_| ()),
        Command::Chatbot(ChatbotCommand::Index(a)) => commands::index(&a).map(|_| ()),
        Command::Chatbot(ChatbotCommand::Serve(a)) => tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()?
            .block_on(serve(*a)),
    }
}
