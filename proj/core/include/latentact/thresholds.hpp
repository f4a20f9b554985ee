#pragma once

namespace latentact::thresholds {

// Every scenario pass/fail threshold lives here and nowhere else; the
// acceptance suite asserts against the same constants.

// Non-identifiability counterexample.
inline constexpr double kProp1ResidualMax = 1e-12;
inline constexpr double kProp1GapMin = 0.25;
inline constexpr double kProp1RuntimeSec = 1.0;

// Finite recovery from exact observables.
inline constexpr int kFiniteExactEnvs = 50;
inline constexpr int kFiniteExactMinSuccesses = 48;
inline constexpr double kFiniteExactErrMax = 1e-5;
inline constexpr double kFiniteExactResidualMax = 1e-8;
inline constexpr double kFiniteExactRuntimeSec = 60.0;
inline constexpr int kFiniteN = 6;
inline constexpr int kFiniteK = 3;
inline constexpr int kFiniteM = 5;

// Finite recovery from sampled data.
inline constexpr int kFiniteSampledTransitions = 200000;
inline constexpr double kFiniteSampledTvMax = 0.05;
inline constexpr double kFiniteSampledRuntimeSec = 120.0;

// Determinant-bound lemma suite.
inline constexpr int kDetBoundSamples = 1000;
inline constexpr double kDetBoundSlack = 1e-10;
inline constexpr double kDetNearExtremalSlack = 1e-8;
inline constexpr double kDetPermDistanceMax = 1e-6;

// Diagonal-rescaling lemma suite.
inline constexpr int kNoScalingTrials = 500;
inline constexpr double kNoScalingTol = 1e-12;

// Embedding correctness.
inline constexpr int kGramMcPairs = 20;
inline constexpr int kGramMcSamples = 100000;
inline constexpr double kGramMcRelErrMax = 2e-2;
inline constexpr double kGramMinEigenvalue = -1e-9;
inline constexpr double kFiniteDeltaEquivalenceTol = 1e-8;

// Continuous recovery through a gaussian dictionary.
inline constexpr int kContDim = 2;
inline constexpr int kContComponents = 8;
inline constexpr int kContK = 3;
inline constexpr int kContM = 5;
inline constexpr double kContCoordErrMax = 1e-4;
inline constexpr double kContRuntimeSec = 60.0;

// Global alignment and anchor resolution.
inline constexpr int kAlignPathNodes = 50;
inline constexpr int kAlignAnchors = 20;

// Estimator.
inline constexpr int kEstimatorAnchors = 30;
inline constexpr double kEstimatorTvMax = 0.1;
inline constexpr int kGradCheckInstances = 20;
inline constexpr double kGradCheckRelErrMax = 1e-4;

// Diversity audit.
inline constexpr int kDiversityMonotoneTrials = 200;

}  // namespace latentact::thresholds
