#include "moca/metrics.h"

#include "moca/errors.h"

namespace moca {

AgreementStats cohen_kappa(const ConfusionMatrix & matrix) {
    const double n = static_cast<double>(matrix.total());
    if (n <= 0.0) {
        throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
    }

    AgreementStats stats;
    stats.matrix   = matrix;
    stats.accuracy = static_cast<double>(matrix.tp + matrix.tn) / n;

    // expected agreement from row/column marginals
    const double rater_a_pos = static_cast<double>(matrix.tp + matrix.fp) / n;
    const double rater_b_pos = static_cast<double>(matrix.tp + matrix.fn) / n;
    const double p_e = rater_a_pos * rater_b_pos + (1.0 - rater_a_pos) * (1.0 - rater_b_pos);

    if (p_e >= 1.0) {
        // both raters constant: agreement is either perfect or chance-free zero
        stats.kappa = stats.accuracy >= 1.0 ? 1.0 : 0.0;
    } else {
        stats.kappa = (stats.accuracy - p_e) / (1.0 - p_e);
    }
    return stats;
}

MetricsReport classification_metrics(const std::vector<bool> & predictions,
                                     const std::vector<bool> & labels) {
    if (predictions.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) {
        throw Error(ErrorCode::EmptyList, "no predictions");
    }

    ConfusionMatrix m;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i]) {
            labels[i] ? ++m.tp : ++m.fp;
        } else {
            labels[i] ? ++m.fn : ++m.tn;
        }
    }

    MetricsReport report;
    report.n        = static_cast<int>(predictions.size());
    report.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
    report.precision =
        m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    report.recall =
        m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    report.f1 = report.precision + report.recall > 0.0
                    ? 2.0 * report.precision * report.recall / (report.precision + report.recall)
                    : 0.0;
    return report;
}

}  // namespace moca
