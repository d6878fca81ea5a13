import pytest

from scatter_lab.validation import (
    ErrorCodeFormatter,
    ExitCode,
    LabErrorCode,
    LabErrorHandler,
    create_error,
    exit_code_for,
)
from scatter_lab.validation.exceptions import (
    CFLViolation,
    ConfigSchemaError,
    GeometryError,
    RayError,
    TIRTermination,
)


class TestErrorCodes:
    def test_categories(self):
        assert LabErrorCode.get_category(LabErrorCode.CONFIG_SCHEMA) == "Config"
        assert LabErrorCode.get_category(LabErrorCode.CFL_VIOLATION) == "Wave"
        assert LabErrorCode.get_category(LabErrorCode.DATA_OUTSIDE_THETA) == "Warning"

    def test_warnings_are_not_errors(self):
        assert LabErrorCode.is_error(LabErrorCode.NOT_HARMONIC)
        assert not LabErrorCode.is_error(LabErrorCode.SPEED_FLAGGED)
        assert not LabErrorCode.is_error(LabErrorCode.SUCCESS)

    def test_formatter_adds_hint(self):
        text = ErrorCodeFormatter.format(LabErrorCode.CFL_VIOLATION, "dt too large")
        assert text.startswith("Wave error 201 (CFL_VIOLATION): dt too large")
        assert "Hint:" in text


class TestExceptions:
    def test_concrete_errors_carry_their_code(self):
        error = TIRTermination("ray reflected")
        assert isinstance(error, RayError)
        assert error.code == LabErrorCode.TIR_TERMINATION
        assert str(error) == "[TIR_TERMINATION] ray reflected"

    def test_schema_error_lists_keys(self):
        error = ConfigSchemaError("bad config", keys=['grid.spacing', 'mode'])
        assert str(error).endswith("[keys: grid.spacing, mode]")

    def test_create_error_picks_category(self):
        error = create_error(LabErrorCode.P_NOT_ON_BOUNDARY, "p is interior", "interfaces", "setup_probe", p=[0.5])
        assert isinstance(error, GeometryError)
        assert str(error) == "[P_NOT_ON_BOUNDARY] p is interior (in interfaces.setup_probe)"
        assert error.get_details()['error_info']['context'] == {'p': [0.5]}


class TestExitCodes:
    def test_config_problems_exit_2(self):
        assert exit_code_for(ConfigSchemaError("x", keys=['model'])) == ExitCode.CONFIG_ERROR
        assert exit_code_for(FileNotFoundError("absent.yaml")) == ExitCode.CONFIG_ERROR

    def test_numerical_failures_exit_3(self):
        assert exit_code_for(CFLViolation("dt")) == ExitCode.NUMERICAL_FAILURE

    def test_other_exceptions_propagate(self):
        with pytest.raises(KeyError):
            exit_code_for(KeyError("x"))

    def test_handler_counts_codes(self):
        handler = LabErrorHandler()
        handler.handle(CFLViolation("dt"))
        handler.handle(CFLViolation("dt again"))
        handler.handle(FileNotFoundError("absent.yaml"))
        assert handler.collector.summary() == {'CFL_VIOLATION': 2, 'MISSING_FILE': 1}

    def test_handler_wraps_missing_file(self, caplog):
        handler = LabErrorHandler()
        assert handler.handle(FileNotFoundError("absent.yaml"), "forward") == ExitCode.CONFIG_ERROR
        [handled] = handler.collector.errors
        assert handled.code == LabErrorCode.MISSING_FILE
        assert handled.message.startswith("Config error 4 (MISSING_FILE): absent.yaml")
        assert caplog.records[-1].levelname == "ERROR"

    def test_handler_logs_warning_codes_as_warnings(self, caplog):
        handler = LabErrorHandler()
        handler.handle(RayError("profile flagged", LabErrorCode.SPEED_FLAGGED))
        handler.handle(TIRTermination("ray reflected"))
        assert [r.levelname for r in caplog.records[-2:]] == ["WARNING", "ERROR"]
        assert handler.collector.by_category() == {'Warning': 1, 'Ray': 1}
