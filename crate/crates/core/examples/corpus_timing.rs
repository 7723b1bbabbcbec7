//! Generate the default synthetic corpus, classify it, and print timing
//! statistics for the smooth-turn group. Mirrors the README example.

use turnlab::stats::timing_stats;
use turnlab::{classify_session, generate_fixture, FixtureSpec, PipelineConfig};

fn main() -> turnlab::Result<()> {
    let (sessions, truth) = generate_fixture(&FixtureSpec::default())?;
    let config = PipelineConfig::default();
    let classified = sessions
        .into_iter()
        .map(|s| classify_session(s, &[], &config.classifier, config.annotation_tolerance))
        .collect::<turnlab::Result<Vec<_>>>()?;

    let timing = timing_stats(&classified);
    let smooth = &timing.groups["smooth"];
    println!(
        "{} scripted exchanges; {} smooth turns starting on average {:.3} s into the turn",
        truth.len(),
        smooth.count,
        smooth.onset_distance.mean.unwrap_or(f64::NAN)
    );
    Ok(())
}
