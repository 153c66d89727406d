# Generated by Django 4.2.20 on 2026-10-17 09:12

from django.db import migrations, models
import django.db.models.deletion
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="SweepRun",
            fields=[
                (
                    "id",
                    models.UUIDField(
                        default=uuid.uuid4,
                        editable=False,
                        primary_key=True,
                        serialize=False,
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("updated_at", models.DateTimeField(auto_now=True)),
                (
                    "kind",
                    models.CharField(
                        choices=[
                            ("theta", "Sweep over theta"),
                            ("n", "Sweep over particle number"),
                        ],
                        max_length=10,
                    ),
                ),
                ("model_spec", models.CharField(max_length=255)),
                ("schemes", models.JSONField(default=list)),
                ("noise_levels", models.JSONField(default=list)),
                ("grid", models.JSONField(default=dict)),
                ("seed", models.BigIntegerField(blank=True, null=True)),
                (
                    "status",
                    models.CharField(
                        choices=[
                            ("pending", "Pending"),
                            ("completed", "Completed"),
                            ("failed", "Failed"),
                        ],
                        db_index=True,
                        default="pending",
                        max_length=20,
                    ),
                ),
                ("failure_reason", models.TextField(blank=True, default="")),
            ],
            options={
                "ordering": ["created_at"],
                "abstract": False,
            },
        ),
        migrations.CreateModel(
            name="SweepPoint",
            fields=[
                (
                    "id",
                    models.UUIDField(
                        default=uuid.uuid4,
                        editable=False,
                        primary_key=True,
                        serialize=False,
                    ),
                ),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("updated_at", models.DateTimeField(auto_now=True)),
                ("index", models.PositiveIntegerField()),
                (
                    "scheme",
                    models.CharField(
                        choices=[
                            ("two-copy", "Two-copy local randomization"),
                            ("four-copy", "Four-copy local randomization"),
                            ("collective", "Two-copy collective randomization"),
                        ],
                        max_length=20,
                    ),
                ),
                ("n", models.PositiveIntegerField()),
                ("theta", models.FloatField()),
                ("p", models.FloatField()),
                ("variance", models.FloatField(blank=True, null=True)),
                ("gain", models.FloatField(blank=True, null=True)),
                ("degenerate", models.BooleanField(default=False)),
                (
                    "run",
                    models.ForeignKey(
                        on_delete=django.db.models.deletion.CASCADE,
                        related_name="points",
                        to="metrology.sweeprun",
                    ),
                ),
            ],
            options={
                "ordering": ["index"],
            },
        ),
        migrations.AddConstraint(
            model_name="sweeppoint",
            constraint=models.UniqueConstraint(
                fields=("run", "index"), name="unique_point_per_run"
            ),
        ),
    ]
