from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ComparisonRun",
            fields=[
                (
                    "id",
                    models.BigAutoField(
                        auto_created=True,
                        primary_key=True,
                        serialize=False,
                        verbose_name="ID",
                    ),
                ),
                ("a", models.FloatField()),
                ("b", models.FloatField()),
                ("epsilon", models.FloatField()),
                ("dt", models.FloatField()),
                ("t_list", models.JSONField(default=list)),
                ("xi_grid", models.JSONField(default=list)),
                ("slope_b", models.FloatField(blank=True, null=True)),
                ("slope_a", models.FloatField(blank=True, null=True)),
                ("residual_b", models.FloatField(blank=True, null=True)),
                ("residual_a", models.FloatField(blank=True, null=True)),
                ("pointwise_decay", models.BooleanField(default=False)),
                ("passed", models.BooleanField(default=False)),
                ("summary", models.JSONField(blank=True, default=list)),
                ("out_dir", models.CharField(blank=True, max_length=500)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "ordering": ["-created_at"],
            },
        ),
    ]
