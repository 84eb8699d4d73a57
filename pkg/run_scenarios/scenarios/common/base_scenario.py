"""
Base Scenario Class
Common step runner, status tracking and staged output for all commands
"""

import logging
import os
import shutil
import tempfile
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

from services.errors import QiupError, ValidationError


class ScenarioStatus(Enum):
    """Scenario execution status"""
    IDLE = "idle"
    INITIALIZING = "initializing"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    STOPPED = "stopped"


@dataclass
class ScenarioStep:
    """Individual scenario step"""
    name: str
    action: str
    parameters: Dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioConfig:
    """Scenario configuration"""
    name: str
    description: str
    steps: List[ScenarioStep] = field(default_factory=list)


class BaseScenario(ABC):
    """Base class for all command scenarios"""

    def __init__(self, log_callback: Callable = None):
        self.logger = logging.getLogger(self.__class__.__module__)
        self.log_callback = log_callback or self._default_log

        self.status = ScenarioStatus.IDLE
        self.current_step = 0
        self.total_steps = 0
        self.last_error: Optional[BaseException] = None

        self._target_dir: Optional[str] = None
        self._staging_dir: Optional[str] = None

    def _default_log(self, message: str, level: str = "info"):
        """Default logging function"""
        if level == "error":
            self.logger.error(message)
        elif level == "warn":
            self.logger.warning(message)
        elif level == "debug":
            self.logger.debug(message)
        else:
            self.logger.info(message)

    @abstractmethod
    def get_config(self) -> ScenarioConfig:
        """Get scenario configuration"""
        pass

    @abstractmethod
    def execute_step(self, step: ScenarioStep) -> bool:
        """Execute a single scenario step"""
        pass

    # ------------------------------------------------------------------
    # Staged output: written to a sibling temp dir, renamed on success
    # ------------------------------------------------------------------

    def begin_output(self, target_dir: str, overwrite: bool = False) -> str:
        target_dir = os.path.abspath(target_dir)
        if os.path.exists(target_dir) and not overwrite:
            if not os.path.isdir(target_dir) or os.listdir(target_dir):
                raise ValidationError(f"output directory {target_dir} exists; pass --overwrite to replace it")
        parent = os.path.dirname(target_dir)
        os.makedirs(parent, exist_ok=True)
        self._target_dir = target_dir
        self._staging_dir = tempfile.mkdtemp(prefix='.' + os.path.basename(target_dir) + '.', dir=parent)
        self.log_callback(f"Staging output in {self._staging_dir}", "debug")
        return self._staging_dir

    def commit_output(self):
        if self._staging_dir is None:
            return
        if os.path.isdir(self._target_dir):
            shutil.rmtree(self._target_dir)
        elif os.path.exists(self._target_dir):
            os.remove(self._target_dir)
        os.replace(self._staging_dir, self._target_dir)
        self.log_callback(f"Output written to {self._target_dir}", "info")
        self._staging_dir = None

    def discard_output(self):
        if self._staging_dir is not None:
            shutil.rmtree(self._staging_dir, ignore_errors=True)
            self._staging_dir = None

    @property
    def staging_dir(self) -> Optional[str]:
        return self._staging_dir

    # ------------------------------------------------------------------

    def run(self) -> bool:
        """Run the complete scenario"""
        try:
            self.status = ScenarioStatus.INITIALIZING
            config = self.get_config()
            self.total_steps = len(config.steps)

            self.log_callback(f"Starting scenario: {config.name}", "info")
            self.log_callback(f"Description: {config.description}", "info")
            self.log_callback(f"Total steps: {self.total_steps}", "info")

            self.status = ScenarioStatus.RUNNING

            for i, step in enumerate(config.steps):
                self.current_step = i + 1

                self.log_callback(f"Step {self.current_step}/{self.total_steps}: {step.name}", "info")

                success = self.execute_step(step)

                if not success:
                    self.log_callback(f"Step {self.current_step} failed: {step.name}", "error")
                    self.status = ScenarioStatus.FAILED
                    self.discard_output()
                    return False

                self.log_callback(f"Step {self.current_step} completed: {step.name}", "info")

            self.commit_output()
            self.status = ScenarioStatus.COMPLETED
            self.log_callback(f"Scenario completed successfully: {config.name}", "info")
            return True

        except QiupError as e:
            self.last_error = e
            self.log_callback(f"{type(e).__name__}: {e}", "error")
            self.status = ScenarioStatus.FAILED
            self.discard_output()
            return False
        except Exception as e:
            self.last_error = e
            self.log_callback(f"Scenario execution error: {e}", "error")
            self.status = ScenarioStatus.FAILED
            self.discard_output()
            return False

    def get_progress(self) -> Dict[str, Any]:
        """Get current progress information"""
        return {
            'status': self.status.value,
            'current_step': self.current_step,
            'total_steps': self.total_steps,
            'progress_percent': int((self.current_step / self.total_steps) * 100) if self.total_steps > 0 else 0
        }
