//! Parse MQM annotations and score each translation.

use mtmeta::corpus::{parse_mqm_str, MqmFormat};
use mtmeta::mqm::{classify, gold_scores, GoldOptions};

const MQM: &str = "\
system\tdoc\tdoc_id\tseg_id\trater\tsource\ttarget\tcategory\tseverity
sysA\tnews-1\t1\t1\trater1\tDer Hund bellt.\tThe dog barks.\tNo-error\tNo-error
sysB\tnews-1\t1\t1\trater1\tDer Hund bellt.\tThe dog <v>bark</v>.\tFluency/Grammar\tMinor
sysB\tnews-1\t1\t1\trater1\tDer Hund bellt.\tThe dog bark.\tStyle/Awkward\tMinor
sysC\tnews-1\t1\t1\trater1\tDer Hund bellt.\tThe <v>cat</v> barks.\tAccuracy/Mistranslation\tMajor
sysC\tnews-1\t1\t1\trater2\tDer Hund bellt.\tThe cat barks.\tAccuracy/Mistranslation\tMajor
";

fn main() -> mtmeta::Result<()> {
    let parsed = parse_mqm_str(MQM, &MqmFormat::default())?;
    println!("{} annotation rows", parsed.annotations.len());

    let gold = gold_scores(&parsed.annotations, "de-en", &GoldOptions::default())?;
    for (key, g) in &gold {
        println!(
            "{key}: MQM {:>5} from raters {:?} -> {}",
            g.score,
            g.rater_scores,
            classify(g.score)?
        );
    }
    Ok(())
}
