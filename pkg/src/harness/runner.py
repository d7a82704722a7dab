"""
Round driver for federated experiments.

Runs the client phase on a thread pool, aggregates with RAIN (plaintext or two-server)
or a baseline, applies the model update and emits one metrics record per round.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path

import numpy as np
import structlog

from src.adversary.attacks import build_attack
from src.adversary.models import ServerTamperSpec, select_malicious
from src.adversary.tamper import server_tamper
from src.aggregation.baselines import baseline_aggregate
from src.aggregation.models import AggregationOutcome, BaselineKind, ReferenceDirection, ReferenceSource
from src.aggregation.rain import RainAggregator, hamming_normalized, model_update
from src.client.params import OutputMode, validate_dp
from src.client.privacy import PrivacyLedger
from src.config import get_settings
from src.exceptions import FatalAbortError
from src.harness.client import LocalStep, local_gradient, randomize_and_share
from src.harness.metrics import MetricsWriter, comm_account, summarize_weights
from src.harness.partition import partition_noniid
from src.harness.task import SyntheticTask, accuracy, attack_success_rate, root_direction
from src.protocol.engine import MpcRoundResult, TwoServerAggregator
from src.protocol.gates import GateCostModel
from src.ring.dealer import dealer_setup
from src.ring.prg import Prg, seed_from_int
from src.schemas.experiment import AggregatorKind, ExperimentConfig, RunMode, dump_config
from src.schemas.metrics import CommStats, ExperimentSummary, RoundMetrics

logger = structlog.get_logger()


@dataclass(eq=False)
class FederationState:
    """Global model between rounds."""

    round_index: int
    w: np.ndarray
    previous_direction: np.ndarray | None = None


@dataclass(eq=False)
class RoundRecord:
    """Everything one round produced, for tests and the summary."""

    metrics: RoundMetrics
    steps: list[LocalStep]
    outcome: AggregationOutcome | None = None
    mpc: MpcRoundResult | None = None
    client_weights: np.ndarray | None = None


class ExperimentRunner:
    """Owns the task, the partition and the adversary for one seeded experiment."""

    def __init__(self, config: ExperimentConfig, workers: int | None = None):
        self.config = config
        self.params = config.rain.params()
        self.seed = seed_from_int(config.seed)
        self.workers = workers or get_settings().client_workers

        task_cfg = config.task
        num_clients = task_cfg.num_clients
        self.task = SyntheticTask.generate(
            d_feat=task_cfg.d_feat,
            num_classes=task_cfg.num_classes,
            num_train=num_clients * task_cfg.samples_per_client,
            num_test=task_cfg.test_size,
            num_calibration=task_cfg.calibration_size,
            seed=config.seed,
            class_separation=task_cfg.class_separation,
        )
        self.clients = partition_noniid(
            self.task.x_train,
            self.task.y_train,
            num_clients,
            task_cfg.num_classes,
            task_cfg.q,
            config.seed,
        )
        self.malicious = select_malicious(num_clients, config.attack.malicious_fraction, config.seed)
        self.attack = build_attack(config.attack)
        self.ledger = PrivacyLedger(delta=config.rain.delta)
        self.aggregator = RainAggregator(self.params.lambda_mad, self.params.output_mode)
        self.transcript_dir: Path | None = None
        self._mpc: TwoServerAggregator | None = None

    @property
    def mpc(self) -> TwoServerAggregator:
        if self._mpc is None:
            gates = self.config.gates
            self._mpc = TwoServerAggregator(
                self.params,
                GateCostModel(gates.cmp_elements, gates.cmp_rounds, gates.threshold_rounds),
            )
        return self._mpc

    @property
    def num_clients(self) -> int:
        return self.config.task.num_clients

    @property
    def learning_rate(self) -> float:
        return self.config.rain.effective_learning_rate

    def initial_state(self) -> FederationState:
        return FederationState(round_index=0, w=self.task.initial_model())

    def reference(self, state: FederationState) -> ReferenceDirection:
        if (
            self.config.rain.reference_source is ReferenceSource.PREVIOUS_ROUND
            and state.previous_direction is not None
        ):
            return ReferenceDirection(state.previous_direction, ReferenceSource.PREVIOUS_ROUND)
        return root_direction(self.task.x_calibration, self.task.y_calibration, state.w, self.task.num_classes)

    def _gradient(self, state: FederationState, client_index: int, adversarial: bool) -> np.ndarray:
        rng = Prg(self.seed, state.round_index, f"client/{client_index}/attack").numpy_generator()
        attack = self.attack if adversarial else None
        spec = self.config.attack if adversarial else None
        return local_gradient(
            self.clients[client_index],
            state.w,
            self.task.num_classes,
            attack,
            spec,
            self.params.sigma,
            rng,
        )

    def local_steps(self, state: FederationState, randomize: bool, share: bool) -> list[LocalStep]:
        """Client phase: gradients, attacks, then clip + Sign-Gaussian (+ sharing) per client."""
        collective = self.attack.requires_benign_grads
        indices = range(self.num_clients)

        def gradient(i: int) -> np.ndarray:
            return self._gradient(state, i, i in self.malicious and not collective)

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            raws = list(pool.map(gradient, indices))

        if collective and self.malicious:
            benign = [raws[i] for i in indices if i not in self.malicious]
            if benign:
                crafted = self.attack.craft_collective(benign, len(self.malicious))
                for i, update in zip(sorted(self.malicious), crafted, strict=True):
                    raws[i] = update

        if not randomize:
            return [LocalStep(client_index=i, raw=raws[i]) for i in indices]

        def randomize_one(i: int) -> LocalStep:
            return randomize_and_share(
                raws[i],
                i,
                self.params.clip,
                self.params.sigma,
                self.seed,
                state.round_index,
                self.params.modulus,
                share,
            )

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(randomize_one, indices))

    def run_round(
        self,
        state: FederationState,
        mode: RunMode | None = None,
        tamper: list[ServerTamperSpec] | None = None,
    ) -> tuple[FederationState, RoundRecord]:
        """
        One federated round: client phase, aggregation, model update, metrics.

        A halted round (MAC abort) or a round without trusted updates leaves the
        model unchanged.
        """
        mode = mode or self.config.mode
        tamper = self.config.tamper_for_round(state.round_index) if tamper is None else tamper
        kind = self.config.aggregator
        uses_signs = kind in (AggregatorKind.RAIN, AggregatorKind.MAJORITY_SIGN)
        steps = self.local_steps(state, randomize=uses_signs, share=mode is RunMode.MPC)

        record = RoundRecord(metrics=self._blank_metrics(state, steps), steps=steps)
        w_next = state.w
        direction: np.ndarray | None = None

        if kind is AggregatorKind.RAIN:
            reference = self.reference(state)
            signs = np.stack([s.update.signs for s in steps])
            if mode is RunMode.MPC:
                direction = self._mpc_round(state, steps, signs, reference, tamper, record)
                step_scale = self.learning_rate
            else:
                direction, step_scale = self._plaintext_round(signs, reference, record)
            if direction is not None:
                w_next = model_update(state.w, direction, step_scale)
                record.metrics.reference_distance = hamming_normalized(reference, np.where(direction >= 0, 1, -1))
        elif kind is AggregatorKind.MAJORITY_SIGN:
            signs = np.stack([s.update.signs for s in steps])
            direction = baseline_aggregate(signs, BaselineKind.MAJORITY_SIGN)
            w_next = model_update(state.w, direction, self.learning_rate)
        else:
            raws = np.stack([s.raw for s in steps])
            direction = baseline_aggregate(raws, BaselineKind(kind.value))
            w_next = model_update(state.w, direction, self.config.task.baseline_lr)

        next_state = FederationState(
            round_index=state.round_index + 1,
            w=w_next,
            previous_direction=np.where(direction >= 0, 1, -1) if direction is not None else state.previous_direction,
        )
        self._finish_metrics(next_state, record)
        logger.info(
            "Round complete",
            round=state.round_index,
            accuracy=record.metrics.accuracy,
            aborted=record.metrics.aborted,
        )
        return next_state, record

    def _plaintext_round(
        self,
        signs: np.ndarray,
        reference: ReferenceDirection,
        record: RoundRecord,
    ) -> tuple[np.ndarray | None, float]:
        outcome = self.aggregator.aggregate(signs, reference)
        record.outcome = outcome
        record.client_weights = outcome.weights
        record.metrics.tau = float(outcome.tau)
        record.metrics.no_trusted_updates = outcome.no_trusted_updates
        if outcome.no_trusted_updates:
            return None, self.learning_rate

        step_scale = self.learning_rate
        if self.params.output_mode is OutputMode.WEIGHTED and self.config.rain.scale_lr_by_weight_mass:
            step_scale *= float(np.sum(outcome.raw_weights))
            if step_scale <= 0:
                return None, self.learning_rate
        return outcome.direction, step_scale

    def _mpc_round(
        self,
        state: FederationState,
        steps: list[LocalStep],
        signs: np.ndarray,
        reference: ReferenceDirection,
        tamper: list[ServerTamperSpec],
        record: RoundRecord,
    ) -> np.ndarray | None:
        bundle = dealer_setup(self.seed, self.num_clients, self.task.dimension, state.round_index, self.params.modulus)
        deviations = [partial(server_tamper, spec=spec) for spec in tamper]
        result = self.mpc.run_round(bundle, [s.shares for s in steps], reference, deviations)
        record.mpc = result
        metrics = record.metrics
        metrics.comm = comm_account(result.transcript)
        metrics.dropped_slots = result.stream.dropped + len(result.stream.missing)
        metrics.no_trusted_updates = result.no_trusted_updates
        metrics.tau = None if result.tau_int is None else float(result.tau_int)

        if self.config.dump_transcripts and self.transcript_dir is not None:
            self.transcript_dir.mkdir(parents=True, exist_ok=True)
            path = self.transcript_dir / f"round_{state.round_index:04d}.bin"
            path.write_bytes(result.transcript.to_bytes())

        raw = result.client_weights(self.num_clients)
        mass = int(raw.sum())
        record.client_weights = raw / mass if mass > 0 else np.zeros(len(raw))

        if result.aborted:
            metrics.aborted = True
            metrics.abort = result.stream.abort.to_dict()
            return None

        if not tamper:
            plain = RainAggregator(self.params.lambda_mad, OutputMode.SIGN).aggregate(signs, reference)
            if result.output is None:
                metrics.mode_equivalent = plain.no_trusted_updates == result.no_trusted_updates
            else:
                metrics.mode_equivalent = not plain.no_trusted_updates and bool(
                    np.array_equal(plain.direction, result.output)
                )
        return result.output

    def _blank_metrics(self, state: FederationState, steps: list[LocalStep]) -> RoundMetrics:
        clipped_max = max(float(np.max(np.abs(np.clip(s.raw, -self.params.clip, self.params.clip)))) for s in steps)
        raw_max = max(float(np.max(np.abs(s.raw))) for s in steps)
        amplified = self.ledger.record(state.round_index, self.params.epsilon, self.num_clients)
        return RoundMetrics(
            round=state.round_index,
            accuracy=0.0,
            max_abs_g=raw_max,
            dp_holds_realized=validate_dp(self.params, max_abs_g=clipped_max).ok,
            epsilon_local=self.params.epsilon,
            epsilon_amplified=amplified,
        )

    def _finish_metrics(self, state: FederationState, record: RoundRecord) -> None:
        task = self.task
        metrics = record.metrics
        metrics.accuracy = accuracy(state.w, task.x_test, task.y_test, task.num_classes)
        spec = self.config.attack
        if spec.is_backdoor:
            metrics.asr = attack_success_rate(
                state.w,
                task.x_test,
                task.y_test,
                task.num_classes,
                spec.trigger_features(task.d_feat),
                spec.trigger_value,
                spec.target_label,
            )
        if record.client_weights is not None:
            weights = np.asarray(record.client_weights, dtype=np.float64)
            benign = [i for i in range(self.num_clients) if i not in self.malicious]
            malicious = sorted(self.malicious)
            metrics.weights_benign = summarize_weights(weights[benign])
            metrics.weights_malicious = summarize_weights(weights[malicious])

    def run(self, writer: MetricsWriter | None = None) -> tuple[ExperimentSummary, list[RoundRecord]]:
        """
        Run every round and return the summary plus per-round records.

        Raises:
            FatalAbortError: A round halted and rain.halt_is_fatal is set
        """
        state = self.initial_state()
        records: list[RoundRecord] = []
        for _ in range(self.config.rounds):
            state, record = self.run_round(state)
            records.append(record)
            if writer is not None:
                writer.write_round(record.metrics)
            abort = record.metrics.abort
            if record.metrics.aborted and self.config.rain.halt_is_fatal and abort is not None:
                raise FatalAbortError(
                    f"Round {abort['round']} halted on {abort['reason']} at batch index {abort['batch_index']}",
                    round_index=int(abort["round"]),
                    batch_index=int(abort["batch_index"]),
                )

        summary = self.summarize(records)
        if writer is not None:
            writer.write_summary(summary)
        logger.info("Experiment complete", rounds=len(records), final_accuracy=summary.final_accuracy)
        return summary, records

    def summarize(self, records: list[RoundRecord]) -> ExperimentSummary:
        last = records[-1].metrics

        def mean_of(values: list[float]) -> float | None:
            return float(np.mean(values)) if values else None

        benign = [r.metrics.weights_benign.mean for r in records if r.metrics.weights_benign is not None]
        malicious = [r.metrics.weights_malicious.mean for r in records if r.metrics.weights_malicious is not None]
        comms: list[CommStats] = [r.metrics.comm for r in records if r.metrics.comm is not None]
        equivalence = [r.metrics.mode_equivalent for r in records if r.metrics.mode_equivalent is not None]
        amplified = self.ledger.last()

        return ExperimentSummary(
            seed=self.config.seed,
            mode=self.config.mode.value,
            aggregator=self.config.aggregator.value,
            attack=self.config.attack.kind.value,
            rho=self.config.attack.malicious_fraction,
            epsilon=self.params.epsilon,
            sigma=self.params.sigma,
            num_clients=self.num_clients,
            dimension=self.task.dimension,
            rounds=len(records),
            final_accuracy=last.accuracy,
            final_asr=last.asr,
            aborted_rounds=sum(1 for r in records if r.metrics.aborted),
            no_trust_rounds=sum(1 for r in records if r.metrics.no_trusted_updates),
            mean_weight_benign=mean_of(benign),
            mean_weight_malicious=mean_of(malicious),
            epsilon_amplified=amplified[1] if amplified else self.params.epsilon,
            upload_bytes_per_client=comms[-1].upload_bytes_per_client if comms else None,
            server_bytes_per_round=mean_of([float(c.server_bytes) for c in comms]),
            mode_equivalent_rounds=sum(1 for e in equivalence if e) if equivalence else None,
        )


def run_experiment(config: ExperimentConfig, out: Path | None = None) -> ExperimentSummary:
    """
    Seed, run R rounds and write the run directory.

    With `out` set the directory receives config.yaml, metrics.jsonl, summary.csv and,
    when enabled, transcripts/round_XXXX.bin.
    """
    runner = ExperimentRunner(config)
    writer = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.yaml").write_text(dump_config(config), encoding="utf-8")
        writer = MetricsWriter(out)
        runner.transcript_dir = out / "transcripts"
    summary, _ = runner.run(writer)
    return summary
