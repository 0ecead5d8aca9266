//! Subcommand implementations. Measurement fans out across a bounded
//! worker pool; every report is written from deterministically sorted rows,
//! so identical inputs and flags reproduce identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use tone_audit::aggregate::{
    aggregate_prompt, delta_e_diversity, frac_below, group_stats, histogram, mean_std,
    percent_change, two_sigma_hull, weighted_group_mean, welch_t_test, ClassThresholds,
    PromptAggregate, TestResult,
};
use tone_audit::corpus::{
    load_manifest, load_results, persist_results, Category, ManifestEntry, ResultRecord,
    Taxonomy,
};
use tone_audit::skinmask::{
    heuristic_skin_detect, load_mask_native, resample_mask_nearest, ChromaBounds, ImageBuffer,
    MaskError, SkinMask,
};
use tone_audit::tonemetrics::{collect_skin_histogram, tone_of_image, ToneMeasure};

use crate::config::{AggregateArgs, Cli, Command, CompareArgs, HullArgs, MeasureArgs};
use crate::report::{cell, cell2, cell_p, write_csv, write_table};
use crate::AppError;

pub fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Measure(args) => measure(&args),
        Command::Aggregate(args) => aggregate(&args),
        Command::Compare(args) => compare(&args),
        Command::Hull(args) => hull(&args),
    }
}

fn load_taxonomy(path: &Option<PathBuf>) -> Result<Taxonomy, AppError> {
    match path {
        Some(p) => Ok(Taxonomy::from_path(p)?),
        None => Ok(Taxonomy::bundled()),
    }
}

fn ensure_dir(path: &Path) -> Result<(), AppError> {
    fs::create_dir_all(path).map_err(|e| crate::io_err(path, e))
}

/// Worker pool bounded by TONE_AUDIT_THREADS when set; rayon's default
/// (one thread per core) otherwise.
fn worker_pool() -> Result<rayon::ThreadPool, AppError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("TONE_AUDIT_THREADS") {
        let n: usize = raw.parse().unwrap_or(0);
        if n == 0 {
            return Err(AppError::Validation(format!(
                "TONE_AUDIT_THREADS must be a positive integer, got `{raw}`"
            )));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| AppError::Validation(e.to_string()))
}

struct MeasureFailure {
    message: String,
    io: bool,
}

fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("mask.png")
}

/// Mask precedence: explicit manifest column, then a `<stem>.mask.png`
/// sidecar, then the chrominance detector. The coverage verdict is taken at
/// the mask's native resolution; the mask is resampled to the image grid
/// only for pixel collection.
fn resolve_mask(entry: &ManifestEntry, img: &ImageBuffer) -> Result<SkinMask, MaskError> {
    if let Some(mask_path) = &entry.mask_path {
        return load_mask_native(mask_path);
    }
    let sidecar = sidecar_path(&entry.image_path);
    if sidecar.is_file() {
        return load_mask_native(&sidecar);
    }
    Ok(heuristic_skin_detect(img, ChromaBounds::default()))
}

fn measure_one(entry: &ManifestEntry, args: &MeasureArgs) -> Result<ResultRecord, MeasureFailure> {
    let fail = |message: String, io: bool| MeasureFailure {
        message: format!("{}: {message}", entry.image_path.display()),
        io,
    };
    let mask_fail = |e: MaskError| {
        let io = matches!(e, MaskError::Io { .. } | MaskError::Decode { .. });
        fail(e.to_string(), io)
    };
    let img = ImageBuffer::from_path(&entry.image_path).map_err(mask_fail)?;
    let mask = resolve_mask(entry, &img).map_err(mask_fail)?;
    let verdict = mask.verdict(args.coverage_min);
    let seed = entry.seed.unwrap_or(args.seed);
    let tone = if verdict.retained {
        let mask = if (mask.width(), mask.height()) != (img.width(), img.height()) {
            resample_mask_nearest(&mask, img.width(), img.height())
        } else {
            mask
        };
        let samples =
            collect_skin_histogram(&img, &mask).map_err(|e| fail(e.to_string(), false))?;
        Some(
            tone_of_image(&samples, args.k, seed)
                .map_err(|e| fail(format!("cannot extract a tone: {e}"), false))?,
        )
    } else {
        None
    };
    Ok(ResultRecord {
        model_tag: entry.model_tag.clone(),
        identity_id: entry.identity_id.clone(),
        image_path: entry.source.clone(),
        verdict,
        tone,
        k: args.k,
        seed,
    })
}

fn measure(args: &MeasureArgs) -> Result<(), AppError> {
    args.validate()?;
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let load = load_manifest(&args.manifest, &taxonomy, args.min_group)?;
    for w in &load.warnings {
        eprintln!("warning: {w}");
    }
    ensure_dir(&args.out)?;

    let pool = worker_pool()?;
    let outcomes: Vec<Result<ResultRecord, MeasureFailure>> =
        pool.install(|| load.entries.par_iter().map(|e| measure_one(e, args)).collect());

    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("error: {}", f.message);
        }
        let message = format!("{} image(s) failed to process", failures.len());
        return Err(if failures.iter().any(|f| f.io) {
            AppError::Io(message)
        } else {
            AppError::Validation(message)
        });
    }

    let out_path = args.out.join("results.csv");
    persist_results(&records, &out_path)?;
    let excluded = records.iter().filter(|r| !r.verdict.retained).count();
    println!(
        "measured {} image(s), {} excluded by coverage -> {}",
        records.len(),
        excluded,
        out_path.display()
    );
    Ok(())
}

/// Retained tones per (model tag, identity), in canonical order.
fn group_tones(
    records: &[ResultRecord],
    taxonomy: &Taxonomy,
) -> Result<BTreeMap<(String, String), Vec<ToneMeasure>>, AppError> {
    let mut groups: BTreeMap<(String, String), Vec<ToneMeasure>> = BTreeMap::new();
    for r in records {
        if taxonomy.get(&r.identity_id).is_none() {
            return Err(AppError::Validation(format!(
                "results reference an identity not in the taxonomy: `{}`",
                r.identity_id
            )));
        }
        if let Some(t) = r.tone {
            groups
                .entry((r.model_tag.clone(), r.identity_id.clone()))
                .or_default()
                .push(t);
        }
    }
    Ok(groups)
}

struct IdentityRow {
    tag: String,
    category: Category,
    agg: PromptAggregate,
    per_image_de: Vec<f64>,
}

fn identity_rows(
    groups: &BTreeMap<(String, String), Vec<ToneMeasure>>,
    taxonomy: &Taxonomy,
    thresholds: &ClassThresholds,
    de_threshold: f64,
) -> Result<Vec<IdentityRow>, AppError> {
    let mut rows = Vec::with_capacity(groups.len());
    for ((tag, id), tones) in groups {
        let category = taxonomy.get(id).expect("validated in group_tones").category;
        let agg = aggregate_prompt(id, tones, thresholds, de_threshold)?;
        let (_, per_image_de) = delta_e_diversity(tones)?;
        rows.push(IdentityRow {
            tag: tag.clone(),
            category,
            agg,
            per_image_de,
        });
    }
    Ok(rows)
}

fn aggregate(args: &AggregateArgs) -> Result<(), AppError> {
    args.validate()?;
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let records = load_results(&args.results)?;
    ensure_dir(&args.out)?;
    let thresholds = ClassThresholds {
        lightness: args.l_threshold,
        hue: args.h_threshold,
    };

    let groups = group_tones(&records, &taxonomy)?;
    let rows = identity_rows(&groups, &taxonomy, &thresholds, args.de_threshold)?;

    // (a) Per-identity table.
    let header = [
        "model_tag",
        "identity_id",
        "category",
        "n_images",
        "centroid_L",
        "centroid_a",
        "centroid_b",
        "mean_L",
        "std_L",
        "mean_h",
        "std_h",
        "mean_delta_e",
        "frac_delta_e_below",
        "dark_reddish",
        "dark_yellowish",
        "light_reddish",
        "light_yellowish",
    ];
    let mut csv_rows = Vec::new();
    let mut txt_rows = Vec::new();
    for row in &rows {
        let a = &row.agg;
        csv_rows.push(vec![
            row.tag.clone(),
            a.identity_id.clone(),
            row.category.to_string(),
            a.n_images.to_string(),
            cell(a.centroid.l),
            cell(a.centroid.a),
            cell(a.centroid.b),
            cell(a.mean_l),
            cell(a.std_l),
            cell(a.mean_h),
            cell(a.std_h),
            cell(a.mean_delta_e),
            cell(a.frac_delta_e_below),
            a.class_counts.dark_reddish.to_string(),
            a.class_counts.dark_yellowish.to_string(),
            a.class_counts.light_reddish.to_string(),
            a.class_counts.light_yellowish.to_string(),
        ]);
        txt_rows.push(vec![
            row.tag.clone(),
            a.identity_id.clone(),
            row.category.to_string(),
            a.n_images.to_string(),
            cell2(a.mean_l),
            cell2(a.std_l),
            cell2(a.mean_h),
            cell2(a.std_h),
            cell2(a.mean_delta_e),
            cell2(a.frac_delta_e_below),
            format!(
                "{}/{}/{}/{}",
                a.class_counts.dark_reddish,
                a.class_counts.dark_yellowish,
                a.class_counts.light_reddish,
                a.class_counts.light_yellowish
            ),
        ]);
    }
    write_csv(&args.out.join("per_identity.csv"), &header, &csv_rows)?;
    write_table(
        &args.out.join("per_identity.txt"),
        &[
            "model_tag",
            "identity_id",
            "category",
            "n",
            "mean_L",
            "std_L",
            "mean_h",
            "std_h",
            "mean_dE",
            "frac_dE_below",
            "classes dr/dy/lr/ly",
        ],
        &txt_rows,
    )?;

    // (b) Per-category table with the weighted-mean row.
    let tags: BTreeSet<&String> = rows.iter().map(|r| &r.tag).collect();
    let cat_header = ["model_tag", "category", "size", "mean_L", "mean_h", "mean_delta_e"];
    let mut cat_csv = Vec::new();
    let mut cat_txt = Vec::new();
    for tag in tags {
        let mut weighted: Vec<(u64, f64, f64, f64)> = Vec::new();
        let mut push_row = |category: &str, size: usize, l: f64, h: f64, de: f64| {
            cat_csv.push(vec![
                tag.clone(),
                category.to_string(),
                size.to_string(),
                cell(l),
                cell(h),
                cell(de),
            ]);
            cat_txt.push(vec![
                tag.clone(),
                category.to_string(),
                size.to_string(),
                cell2(l),
                cell2(h),
                cell2(de),
            ]);
        };
        let mut no_stigma: Option<(usize, f64, f64, f64)> = None;
        for category in Category::ALL {
            let members: Vec<&PromptAggregate> = rows
                .iter()
                .filter(|r| r.tag == *tag && r.category == category)
                .map(|r| &r.agg)
                .collect();
            if members.is_empty() {
                continue;
            }
            let stats = group_stats(category.as_str(), &members)?;
            if category.is_stigmatized() {
                push_row(
                    category.as_str(),
                    stats.size,
                    stats.mean_l,
                    stats.mean_h,
                    stats.mean_delta_e,
                );
                weighted.push((
                    stats.size as u64,
                    stats.mean_l,
                    stats.mean_h,
                    stats.mean_delta_e,
                ));
            } else {
                no_stigma = Some((stats.size, stats.mean_l, stats.mean_h, stats.mean_delta_e));
            }
        }
        if !weighted.is_empty() {
            let total: u64 = weighted.iter().map(|w| w.0).sum();
            let l = weighted_group_mean(
                &weighted.iter().map(|w| (w.0, w.1)).collect::<Vec<_>>(),
            )?;
            let h = weighted_group_mean(
                &weighted.iter().map(|w| (w.0, w.2)).collect::<Vec<_>>(),
            )?;
            let de = weighted_group_mean(
                &weighted.iter().map(|w| (w.0, w.3)).collect::<Vec<_>>(),
            )?;
            push_row("Weighted Mean", total as usize, l, h, de);
        }
        if let Some((size, l, h, de)) = no_stigma {
            push_row(Category::NoStigma.as_str(), size, l, h, de);
        }
    }
    write_csv(&args.out.join("per_category.csv"), &cat_header, &cat_csv)?;
    write_table(&args.out.join("per_category.txt"), &cat_header, &cat_txt)?;

    // (c) Per-identity mean ΔE histogram over stigmatized identities.
    let mut hist_rows = Vec::new();
    let tags: BTreeSet<&String> = rows.iter().map(|r| &r.tag).collect();
    for tag in &tags {
        let values: Vec<f64> = rows
            .iter()
            .filter(|r| r.tag == **tag && r.category.is_stigmatized())
            .map(|r| r.agg.mean_delta_e)
            .collect();
        for (lo, hi, count) in histogram(&values, args.bin_width)? {
            hist_rows.push(vec![
                (*tag).clone(),
                cell(lo),
                cell(hi),
                count.to_string(),
            ]);
        }
    }
    write_csv(
        &args.out.join("histogram.csv"),
        &["model_tag", "bin_lo", "bin_hi", "count"],
        &hist_rows,
    )?;

    // (d) Corpus summary per model tag.
    let mut totals: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in &records {
        let slot = totals.entry(r.model_tag.as_str()).or_default();
        slot.0 += 1;
        if r.verdict.retained {
            slot.1 += 1;
        }
    }
    let sum_header = [
        "model_tag",
        "images_total",
        "images_retained",
        "images_excluded",
        "identities",
        "frac_images_de_below",
        "no_stigma_mean_de",
        "frac_identities_below_no_stigma",
    ];
    let mut sum_csv = Vec::new();
    let mut sum_txt = Vec::new();
    for (tag, (total, retained)) in &totals {
        let tag_rows: Vec<&IdentityRow> = rows.iter().filter(|r| r.tag == *tag).collect();
        let pooled: Vec<f64> = tag_rows
            .iter()
            .flat_map(|r| r.per_image_de.iter().copied())
            .collect();
        let frac_images = if pooled.is_empty() {
            None
        } else {
            Some(frac_below(&pooled, args.de_threshold)?)
        };
        let baseline = tag_rows
            .iter()
            .find(|r| !r.category.is_stigmatized())
            .map(|r| r.agg.mean_delta_e);
        let stig_means: Vec<f64> = tag_rows
            .iter()
            .filter(|r| r.category.is_stigmatized())
            .map(|r| r.agg.mean_delta_e)
            .collect();
        let frac_identities = match (baseline, stig_means.is_empty()) {
            (Some(b), false) => Some(frac_below(&stig_means, b)?),
            _ => None,
        };
        let opt = |v: Option<f64>| v.map(cell).unwrap_or_default();
        let opt2 = |v: Option<f64>| v.map(cell2).unwrap_or_else(|| "-".to_string());
        sum_csv.push(vec![
            tag.to_string(),
            total.to_string(),
            retained.to_string(),
            (total - retained).to_string(),
            tag_rows.len().to_string(),
            opt(frac_images),
            opt(baseline),
            opt(frac_identities),
        ]);
        sum_txt.push(vec![
            tag.to_string(),
            total.to_string(),
            retained.to_string(),
            (total - retained).to_string(),
            tag_rows.len().to_string(),
            opt2(frac_images),
            opt2(baseline),
            opt2(frac_identities),
        ]);
    }
    write_csv(&args.out.join("summary.csv"), &sum_header, &sum_csv)?;
    write_table(&args.out.join("summary.txt"), &sum_header, &sum_txt)?;

    println!(
        "wrote per_identity, per_category, histogram, summary -> {}",
        args.out.display()
    );
    Ok(())
}

/// Per-identity metric samples drawn from one corpus: the raw per-image
/// L and h values plus each image's ΔE to the identity centroid.
struct MetricSamples {
    l: Vec<f64>,
    h: Vec<f64>,
    de: Vec<f64>,
}

fn metric_samples(tones: &[ToneMeasure]) -> Result<MetricSamples, AppError> {
    let (_, de) = delta_e_diversity(tones)?;
    Ok(MetricSamples {
        l: tones.iter().map(|t| t.l).collect(),
        h: tones.iter().map(|t| t.h).collect(),
        de,
    })
}

/// Welch cells: t, p, stars; empty cells when a side has n < 2.
fn test_cells(a: &[f64], b: &[f64], rounded: bool) -> Vec<String> {
    if a.len() < 2 || b.len() < 2 {
        return vec![String::new(), String::new(), String::new()];
    }
    let r: TestResult = welch_t_test(a, b).expect("lengths checked");
    vec![
        if rounded { cell2(r.t_statistic) } else { cell(r.t_statistic) },
        if rounded { cell_p(r.p_value) } else { cell(r.p_value) },
        r.stars().to_string(),
    ]
}

fn metric_cells(
    a: &[f64],
    b: &[f64],
    mean_a: f64,
    mean_b: f64,
    rounded: bool,
) -> Vec<String> {
    let num = |v: f64| if rounded { cell2(v) } else { cell(v) };
    let pct = match percent_change(mean_a, mean_b) {
        Ok(v) => num(v),
        Err(_) => String::new(),
    };
    let mut cells = vec![num(mean_a), num(mean_b), pct];
    cells.extend(test_cells(a, b, rounded));
    cells
}

fn compare(args: &CompareArgs) -> Result<(), AppError> {
    args.validate()?;
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let records_a = load_results(&args.results_a)?;
    let records_b = load_results(&args.results_b)?;
    ensure_dir(&args.out)?;

    // Pool across model tags inside each corpus: the two files are the units
    // being compared.
    let by_id = |records: &[ResultRecord]| -> Result<BTreeMap<String, Vec<ToneMeasure>>, AppError> {
        let grouped = group_tones(records, &taxonomy)?;
        let mut merged: BTreeMap<String, Vec<ToneMeasure>> = BTreeMap::new();
        for ((_, id), tones) in grouped {
            merged.entry(id).or_default().extend(tones);
        }
        Ok(merged)
    };
    let a_groups = by_id(&records_a)?;
    let b_groups = by_id(&records_b)?;
    let shared: Vec<&String> = a_groups.keys().filter(|id| b_groups.contains_key(*id)).collect();
    if shared.is_empty() {
        return Err(AppError::Validation(
            "the two corpora share no identities with retained images".into(),
        ));
    }

    let metric_header = |m: &str| -> Vec<String> {
        ["mean_a", "mean_b", "pct_change", "t", "p", "stars"]
            .iter()
            .map(|c| format!("{m}_{c}"))
            .collect()
    };
    let mut header: Vec<String> = vec![
        "identity_id".into(),
        "category".into(),
        "n_a".into(),
        "n_b".into(),
    ];
    for m in ["L", "h", "de"] {
        header.extend(metric_header(m));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    struct IdentityComparison {
        id: String,
        category: Category,
        a: MetricSamples,
        b: MetricSamples,
        mean_de_a: f64,
        mean_de_b: f64,
    }
    let mut comparisons = Vec::new();
    for id in &shared {
        let a = metric_samples(&a_groups[*id])?;
        let b = metric_samples(&b_groups[*id])?;
        let mean_de_a = mean_std(&a.de)?.mean;
        let mean_de_b = mean_std(&b.de)?.mean;
        comparisons.push(IdentityComparison {
            id: (*id).clone(),
            category: taxonomy.get(id).expect("validated").category,
            a,
            b,
            mean_de_a,
            mean_de_b,
        });
    }

    let mut rows_csv = Vec::new();
    let mut rows_txt = Vec::new();
    for c in &comparisons {
        for (rows, rounded) in [(&mut rows_csv, false), (&mut rows_txt, true)] {
            let mut row = vec![
                c.id.clone(),
                c.category.to_string(),
                c.a.l.len().to_string(),
                c.b.l.len().to_string(),
            ];
            row.extend(metric_cells(
                &c.a.l,
                &c.b.l,
                mean_std(&c.a.l).map_err(AppError::from)?.mean,
                mean_std(&c.b.l).map_err(AppError::from)?.mean,
                rounded,
            ));
            row.extend(metric_cells(
                &c.a.h,
                &c.b.h,
                mean_std(&c.a.h).map_err(AppError::from)?.mean,
                mean_std(&c.b.h).map_err(AppError::from)?.mean,
                rounded,
            ));
            row.extend(metric_cells(&c.a.de, &c.b.de, c.mean_de_a, c.mean_de_b, rounded));
            rows.push(row);
        }
    }
    write_csv(&args.out.join("compare_identity.csv"), &header_refs, &rows_csv)?;
    write_table(&args.out.join("compare_identity.txt"), &header_refs, &rows_txt)?;

    // Per-category: displayed means weight identities equally; significance
    // pools the per-image samples of the member identities.
    let mut cat_header: Vec<String> = vec![
        "category".into(),
        "n_identities".into(),
        "n_images_a".into(),
        "n_images_b".into(),
    ];
    for m in ["L", "h", "de"] {
        cat_header.extend(metric_header(m));
    }
    let cat_header_refs: Vec<&str> = cat_header.iter().map(String::as_str).collect();
    let mut cat_csv = Vec::new();
    let mut cat_txt = Vec::new();
    for category in Category::ALL {
        let members: Vec<&IdentityComparison> = comparisons
            .iter()
            .filter(|c| c.category == category)
            .collect();
        if members.is_empty() {
            continue;
        }
        type Pick = for<'s> fn(&'s MetricSamples) -> &'s [f64];
        type Side = for<'c> fn(&'c IdentityComparison) -> &'c MetricSamples;
        fn pick_l(s: &MetricSamples) -> &[f64] {
            &s.l
        }
        fn pick_h(s: &MetricSamples) -> &[f64] {
            &s.h
        }
        fn pick_de(s: &MetricSamples) -> &[f64] {
            &s.de
        }
        fn side_a(c: &IdentityComparison) -> &MetricSamples {
            &c.a
        }
        fn side_b(c: &IdentityComparison) -> &MetricSamples {
            &c.b
        }
        let pool = |pick: Pick, side: Side| -> Vec<f64> {
            members
                .iter()
                .flat_map(|c| pick(side(c)).iter().copied())
                .collect()
        };
        let id_means = |pick: Pick, side: Side| -> Result<f64, AppError> {
            let means: Vec<f64> = members
                .iter()
                .map(|c| mean_std(pick(side(c))).map(|m| m.mean))
                .collect::<Result<_, _>>()
                .map_err(AppError::from)?;
            Ok(mean_std(&means).map_err(AppError::from)?.mean)
        };

        let n_a: usize = members.iter().map(|c| c.a.l.len()).sum();
        let n_b: usize = members.iter().map(|c| c.b.l.len()).sum();
        for (rows, rounded) in [(&mut cat_csv, false), (&mut cat_txt, true)] {
            let mut row = vec![
                category.to_string(),
                members.len().to_string(),
                n_a.to_string(),
                n_b.to_string(),
            ];
            for pick in [pick_l as Pick, pick_h as Pick, pick_de as Pick] {
                row.extend(metric_cells(
                    &pool(pick, side_a),
                    &pool(pick, side_b),
                    id_means(pick, side_a)?,
                    id_means(pick, side_b)?,
                    rounded,
                ));
            }
            rows.push(row);
        }
    }
    write_csv(&args.out.join("compare_category.csv"), &cat_header_refs, &cat_csv)?;
    write_table(&args.out.join("compare_category.txt"), &cat_header_refs, &cat_txt)?;

    // Baseline fractions: how many stigmatized identities sit below the
    // OTHER corpus's control-group diversity.
    let baseline = |groups: &BTreeMap<String, Vec<ToneMeasure>>| -> Result<Option<f64>, AppError> {
        for (id, tones) in groups {
            let rec = taxonomy.get(id).expect("validated");
            if !rec.category.is_stigmatized() {
                let (mean, _) = delta_e_diversity(tones)?;
                return Ok(Some(mean));
            }
        }
        Ok(None)
    };
    let ns_a = baseline(&a_groups)?;
    let ns_b = baseline(&b_groups)?;
    let stig_means = |side: fn(&IdentityComparison) -> &MetricSamples| -> Result<Vec<f64>, AppError> {
        comparisons
            .iter()
            .filter(|c| c.category.is_stigmatized())
            .map(|c| Ok(mean_std(side(c).de.as_slice()).map_err(AppError::from)?.mean))
            .collect()
    };
    let means_a = stig_means(|c| &c.a)?;
    let means_b = stig_means(|c| &c.b)?;
    let frac_a = match (ns_b, means_a.is_empty()) {
        (Some(b), false) => Some(frac_below(&means_a, b)?),
        _ => None,
    };
    let frac_b = match (ns_a, means_b.is_empty()) {
        (Some(b), false) => Some(frac_below(&means_b, b)?),
        _ => None,
    };
    let opt = |v: Option<f64>| v.map(cell).unwrap_or_default();
    write_csv(
        &args.out.join("compare_summary.csv"),
        &[
            "shared_identities",
            "no_stigma_mean_de_a",
            "no_stigma_mean_de_b",
            "frac_a_identities_below_b_baseline",
            "frac_b_identities_below_a_baseline",
        ],
        &[vec![
            comparisons.len().to_string(),
            opt(ns_a),
            opt(ns_b),
            opt(frac_a),
            opt(frac_b),
        ]],
    )?;

    println!(
        "compared {} shared identities -> {}",
        comparisons.len(),
        args.out.display()
    );
    Ok(())
}

fn hull(args: &HullArgs) -> Result<(), AppError> {
    let records = load_results(&args.results)?;
    ensure_dir(&args.out)?;
    let mut groups: BTreeMap<String, Vec<ToneMeasure>> = BTreeMap::new();
    for r in &records {
        if let Some(t) = r.tone {
            groups.entry(r.model_tag.clone()).or_default().push(t);
        }
    }

    let header = [
        "model_tag",
        "n_points",
        "n_filtered",
        "degenerate",
        "vertex",
        "L",
        "h",
    ];
    let mut csv_rows = Vec::new();
    let mut txt_rows = Vec::new();
    for (tag, tones) in &groups {
        let hull = two_sigma_hull(tones);
        txt_rows.push(vec![
            tag.clone(),
            tones.len().to_string(),
            hull.retained.to_string(),
            hull.degenerate.to_string(),
            hull.vertices.len().to_string(),
        ]);
        if hull.vertices.is_empty() {
            csv_rows.push(vec![
                tag.clone(),
                tones.len().to_string(),
                hull.retained.to_string(),
                hull.degenerate.to_string(),
                String::new(),
                String::new(),
                String::new(),
            ]);
            continue;
        }
        for (i, (l, h)) in hull.vertices.iter().enumerate() {
            csv_rows.push(vec![
                tag.clone(),
                tones.len().to_string(),
                hull.retained.to_string(),
                hull.degenerate.to_string(),
                i.to_string(),
                cell(*l),
                cell(*h),
            ]);
        }
    }
    write_csv(&args.out.join("hull.csv"), &header, &csv_rows)?;
    write_table(
        &args.out.join("hull.txt"),
        &["model_tag", "n_points", "n_filtered", "degenerate", "n_vertices"],
        &txt_rows,
    )?;
    println!("wrote hull polygons for {} model tag(s) -> {}", groups.len(), args.out.display());
    Ok(())
}
