"""Run-directory management for training and evaluation outputs."""

import logging
from pathlib import Path
from typing import Dict, Optional, Union

from ..exceptions import OutputDirectoryError


class OutputManager:
    """Lays out a run directory and resolves the paths of its artifacts.

    A run directory looks like::

        <run>/config.json
        <run>/curves.csv
        <run>/checkpoints/final.glwt
        <run>/checkpoints/best.glwt
        <run>/reports/report.json
        <run>/reports/confusion.csv
    """

    CONFIG_FILE = "config.json"
    CURVES_FILE = "curves.csv"
    FINAL_CHECKPOINT = "final.glwt"
    BEST_CHECKPOINT = "best.glwt"
    REPORT_FILE = "report.json"
    CONFUSION_FILE = "confusion.csv"

    def __init__(self, base_output_dir: Optional[Union[str, Path]] = None):
        """
        Initialize the output manager.

        Args:
            base_output_dir: Run directory. If None, uses 'runs/default' in the
                current directory.
        """
        self.base_output_dir = (Path(base_output_dir) if base_output_dir
                                else Path.cwd() / "runs" / "default")
        self.logger = logging.getLogger(__name__)

        self.subdirs: Dict[str, str] = {
            'checkpoints': 'checkpoints',
            'reports': 'reports',
        }

    def initialize_output_structure(self) -> Path:
        """
        Create the run directory and its subdirectories.

        Returns:
            Path: The run directory.

        Raises:
            OutputDirectoryError: If a directory cannot be created or written.
        """
        self._create_directory(self.base_output_dir)
        for subdir_name in self.subdirs.values():
            self._create_directory(self.base_output_dir / subdir_name)

        self.logger.info(f"Run directory initialized at: {self.base_output_dir}")
        return self.base_output_dir

    def _create_directory(self, path: Path) -> None:
        """
        Create a directory with proper error handling.

        Args:
            path: Directory path to create.

        Raises:
            OutputDirectoryError: If directory creation fails.
        """
        try:
            path.mkdir(parents=True, exist_ok=True)

            # Test write permissions
            test_file = path / ".write_test"
            try:
                test_file.touch()
                test_file.unlink()
            except OSError as e:
                raise OutputDirectoryError(
                    f"No write permission for directory: {path}. Error: {e}"
                )

        except PermissionError as e:
            raise OutputDirectoryError(
                f"Permission denied creating directory: {path}. Error: {e}"
            )
        except OutputDirectoryError:
            raise
        except OSError as e:
            if e.errno == 28:  # No space left on device
                raise OutputDirectoryError(
                    f"Insufficient disk space to create directory: {path}"
                )
            raise OutputDirectoryError(
                f"Failed to create directory: {path}. Error: {e}"
            )

    def get_output_path(self, filename: str, file_type: Optional[str] = None) -> Path:
        """
        Get the full output path for a file.

        Args:
            filename: File name inside the run directory.
            file_type: Subdirectory key ('checkpoints', 'reports') or None for
                the run directory itself.

        Returns:
            Path: Full path for the output file.
        """
        if file_type is None:
            return self.base_output_dir / filename
        if file_type not in self.subdirs:
            raise ValueError(f"Unknown file type '{file_type}'. "
                             f"Available: {', '.join(self.subdirs)}")
        return self.base_output_dir / self.subdirs[file_type] / filename

    @property
    def config_path(self) -> Path:
        return self.get_output_path(self.CONFIG_FILE)

    @property
    def curves_path(self) -> Path:
        return self.get_output_path(self.CURVES_FILE)

    @property
    def final_checkpoint_path(self) -> Path:
        return self.get_output_path(self.FINAL_CHECKPOINT, 'checkpoints')

    @property
    def best_checkpoint_path(self) -> Path:
        return self.get_output_path(self.BEST_CHECKPOINT, 'checkpoints')

    @property
    def report_path(self) -> Path:
        return self.get_output_path(self.REPORT_FILE, 'reports')

    @property
    def confusion_path(self) -> Path:
        return self.get_output_path(self.CONFUSION_FILE, 'reports')
