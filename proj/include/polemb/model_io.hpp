#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "polemb/classify.hpp"
#include "polemb/common.hpp"
#include "polemb/random_forest.hpp"

namespace polemb {

inline const char* kClassifierKinds =
    "logreg, gnb, svm-linear, rf, majority";

struct ClassifierParams {
    std::string kind = "logreg";
    LogregConfig logreg;
    GnbConfig gnb;
    LinSvmConfig svm;
    RfConfig rf;
    std::uint64_t seed = 1;
};

inline std::unique_ptr<Classifier> train_classifier(const Dataset& ds,
                                                    const ClassifierParams& params) {
    if (params.kind == "logreg") return train_logreg(ds, params.logreg);
    if (params.kind == "gnb") return train_gnb(ds, params.gnb);
    if (params.kind == "svm-linear") {
        LinSvmConfig c = params.svm;
        c.seed = params.seed;
        return train_linsvm(ds, c);
    }
    if (params.kind == "rf") {
        RfConfig c = params.rf;
        c.seed = params.seed;
        return train_random_forest(ds, c);
    }
    if (params.kind == "majority") return train_majority(ds);
    if (params.kind == "svm-poly" || params.kind == "svm-rbf")
        throw ConfigError("kernel SVMs are not supported; available classifiers: " +
                          std::string(kClassifierKinds));
    throw ConfigError("unknown classifier '" + params.kind +
                      "'; available: " + std::string(kClassifierKinds));
}

inline std::unique_ptr<Classifier> load_model(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("model file is empty");
    auto tok = split_ws(line);
    if (tok.size() != 3 || std::string(tok[0]) != "model")
        throw DataError("model file: bad header, expected 'model <kind> <version>'");
    if (std::string(tok[2]) != "1")
        throw DataError("model file: unsupported version " + std::string(tok[2]));
    const std::string kind(tok[1]);
    if (kind == "logreg") return LogregClassifier::load(is);
    if (kind == "gnb") return GnbClassifier::load(is);
    if (kind == "svm-linear") return LinSvmClassifier::load(is);
    if (kind == "rf") return RandomForestClassifier::load(is);
    if (kind == "majority") return MajorityClassifier::load(is);
    throw DataError("model file: unknown kind '" + kind + "'");
}

inline std::unique_ptr<Classifier> load_model_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open model file: " + path);
    return load_model(is);
}

inline void save_model_file(const std::string& path, const Classifier& model) {
    std::ostringstream os;
    model.save(os);
    write_file(path, os.str());
}

}  // namespace polemb
